#include <doctest.h>

#include <stdexcept>

#include <vector>

#include "cbfrl/gridworld.hpp"
#include "cbfrl/oracle.hpp"
#include "cbfrl/rng.hpp"

using namespace cbfrl;

namespace {

// Independent partition oracle: forward survival sets. S_0 = live states;
// S_{j+1} = live states with some action into S_j. On a finite
// deterministic MDP, surviving n_states steps means surviving forever, so
// safe = S_n and an irrecoverable state's k is the first j with x not in
// S_j.
struct SurvivalOracle {
    std::vector<bool> safe;
    std::vector<int> k;  // 0 for safe/unsafe
};

SurvivalOracle survival_oracle(const TabularMDP& mdp) {
    const int n = mdp.n_states;
    std::vector<bool> survives(n);
    std::vector<int> first_doomed(n, 0);
    for (int s = 0; s < n; ++s) survives[s] = !mdp.is_unsafe(s);

    std::vector<bool> prev = survives;
    for (int j = 1; j <= n; ++j) {
        std::vector<bool> cur(n, false);
        for (int s = 0; s < n; ++s) {
            if (mdp.is_unsafe(s)) continue;
            for (int a = 0; a < mdp.n_actions; ++a) {
                if (prev[mdp.successor(s, a)]) {
                    cur[s] = true;
                    break;
                }
            }
            if (!cur[s] && !mdp.is_unsafe(s) && first_doomed[s] == 0) first_doomed[s] = j;
        }
        prev = cur;
    }

    SurvivalOracle out;
    out.safe = prev;
    out.k.assign(n, 0);
    for (int s = 0; s < n; ++s) {
        if (!mdp.is_unsafe(s) && !prev[s]) out.k[s] = first_doomed[s];
    }
    return out;
}

GridWorld random_grid(RngStream& rng) {
    const int w = 4 + rng.uniform_int(4);
    const int h = 4 + rng.uniform_int(4);
    std::vector<char> cells(static_cast<std::size_t>(w) * h, '.');
    const char drift_chars[4] = {'^', '>', 'v', '<'};
    for (auto& c : cells) {
        const double u = rng.uniform01();
        if (u < 0.15) {
            c = 'H';
        } else if (u < 0.3) {
            c = drift_chars[rng.uniform_int(4)];
        }
    }
    cells[0] = '.';  // keep at least one non-hazard cell
    std::string map;
    for (int r = 0; r < h; ++r) {
        map.append(cells.begin() + static_cast<std::size_t>(r) * w,
                   cells.begin() + static_cast<std::size_t>(r + 1) * w);
        map.push_back('\n');
    }
    return gridworld_from_map(map);
}

} // namespace

TEST_CASE("default gridworld structure") {
    const GridWorld gw = default_gridworld();
    CHECK(gw.width == 8);
    CHECK(gw.height == 8);
    CHECK(gw.mdp.n_states == 64);
    CHECK(gw.mdp.n_actions == 4);

    const Partition p = compute_partition(gw.mdp);
    CHECK(p.horizon == 4);

    // Drift cell adjacent to the hazard is forced in, in one step.
    CHECK(p.k[gw.state_of({5, 4})] == 1);
    // The corridor entry is the far end of the length-4 drift run.
    CHECK(p.k[gw.state_of({5, 1})] == 4);
    CHECK(p.k[gw.state_of({5, 2})] == 3);
    CHECK(p.k[gw.state_of({5, 3})] == 2);

    // Hazards are labelled unsafe with no horizon.
    CHECK(p.is_unsafe(gw.state_of({1, 1})));
    CHECK(p.k[gw.state_of({1, 1})] == 0);

    // A cell with an action into open space is indefinitely safe.
    CHECK(p.is_safe(gw.state_of({0, 0})));
    CHECK(p.is_safe(gw.state_of({4, 1})));  // above the corridor, can step up
}

TEST_CASE("transition table is total and closed") {
    RngStream rng(17, "grids");
    for (int trial = 0; trial < 25; ++trial) {
        const GridWorld gw = random_grid(rng);
        for (int s = 0; s < gw.mdp.n_states; ++s) {
            for (int a = 0; a < gw.mdp.n_actions; ++a) {
                const int t = gw.mdp.successor(s, a);
                CHECK(t >= 0);
                CHECK(t < gw.mdp.n_states);
            }
        }
        // Off-grid moves stay in place: top-left corner moving up/left.
        if (gw.cell_at(0) == '.') {
            CHECK(gw.mdp.successor(0, 0) == 0);
            CHECK(gw.mdp.successor(0, 3) == 0);
        }
    }
}

TEST_CASE("partition agrees with the survival oracle on random grids") {
    RngStream rng(19, "grids");
    for (int trial = 0; trial < 25; ++trial) {
        const GridWorld gw = random_grid(rng);
        const Partition p = compute_partition(gw.mdp);
        const SurvivalOracle oracle = survival_oracle(gw.mdp);
        for (int s = 0; s < gw.mdp.n_states; ++s) {
            if (gw.mdp.is_unsafe(s)) {
                CHECK(p.is_unsafe(s));
                continue;
            }
            CHECK(p.is_safe(s) == oracle.safe[s]);
            if (!oracle.safe[s]) {
                CHECK(p.is_irrecoverable(s));
                CHECK(p.k[s] == oracle.k[s]);
            }
        }
    }
}

TEST_CASE("map round trip") {
    RngStream rng(23, "maps");
    for (int trial = 0; trial < 10; ++trial) {
        const GridWorld gw = random_grid(rng);
        const GridWorld back = gridworld_from_map(gridworld_to_map(gw));
        CHECK(back.width == gw.width);
        CHECK(back.height == gw.height);
        CHECK(back.cells == gw.cells);
        CHECK(back.mdp.next == gw.mdp.next);
        CHECK(back.mdp.unsafe == gw.mdp.unsafe);
    }
}

TEST_CASE("builder and parser reject malformed input") {
    CHECK_THROWS_AS(gridworld_build(2, 8, {}, {}), std::invalid_argument);
    CHECK_THROWS_AS(gridworld_build(4, 4, {{9, 9}}, {}), std::invalid_argument);

    // Hazards everywhere leave no room for a nontrivial barrier.
    std::vector<Cell> all;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) all.push_back({r, c});
    }
    CHECK_THROWS_AS(gridworld_build(3, 3, all, {}), std::invalid_argument);

    CHECK_THROWS_AS(gridworld_from_map("...\n..\n...\n"), std::invalid_argument);  // ragged
    CHECK_THROWS_AS(gridworld_from_map("...\n.X.\n...\n"), std::invalid_argument); // bad cell
    CHECK_THROWS_AS(gridworld_from_map(""), std::invalid_argument);
}
