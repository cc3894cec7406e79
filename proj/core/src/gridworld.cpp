#include "cbfrl/gridworld.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace cbfrl {

namespace {

constexpr int kGridActions = 4;

// Action/drift order: up, right, down, left.
constexpr int kDr[kGridActions] = {-1, 0, 1, 0};
constexpr int kDc[kGridActions] = {0, 1, 0, -1};

char drift_char(Drift d) {
    switch (d) {
        case Drift::kUp: return '^';
        case Drift::kRight: return '>';
        case Drift::kDown: return 'v';
        case Drift::kLeft: return '<';
    }
    throw std::invalid_argument("drift_char: bad drift");
}

int drift_dir(char c) {
    switch (c) {
        case '^': return 0;
        case '>': return 1;
        case 'v': return 2;
        case '<': return 3;
    }
    return -1;
}

GridWorld build_from_cells(int width, int height, std::vector<char> cells) {
    GridWorld gw;
    gw.width = width;
    gw.height = height;
    gw.cells = std::move(cells);

    const int n = width * height;
    if (std::all_of(gw.cells.begin(), gw.cells.end(), [](char c) { return c == 'H'; })) {
        throw std::invalid_argument("gridworld_build: hazards cover every cell");
    }

    gw.mdp.n_states = n;
    gw.mdp.n_actions = kGridActions;
    gw.mdp.next.assign(static_cast<std::size_t>(n) * kGridActions, 0);
    gw.mdp.unsafe.assign(n, 0);

    auto target = [&](int r, int c, int dir) {
        const int nr = r + kDr[dir];
        const int nc = c + kDc[dir];
        if (nr < 0 || nr >= height || nc < 0 || nc >= width) return r * width + c;
        return nr * width + nc;
    };

    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const int s = r * width + c;
            const char cell = gw.cells[s];
            if (cell == 'H') {
                gw.mdp.unsafe[s] = 1;
                for (int a = 0; a < kGridActions; ++a) gw.mdp.next[s * kGridActions + a] = s;
                continue;
            }
            const int forced = drift_dir(cell);
            for (int a = 0; a < kGridActions; ++a) {
                const int dir = forced >= 0 ? forced : a;
                gw.mdp.next[s * kGridActions + a] = target(r, c, dir);
            }
        }
    }
    return gw;
}

} // namespace

GridWorld gridworld_build(int width, int height,
                          const std::vector<Cell>& hazard_cells,
                          const std::vector<std::pair<Cell, Drift>>& drift_cells) {
    if (width < 3 || height < 3) {
        throw std::invalid_argument("gridworld_build: dimensions must be at least 3x3");
    }
    std::vector<char> cells(static_cast<std::size_t>(width) * height, '.');
    auto at = [&](Cell c) -> char& {
        if (c.row < 0 || c.row >= height || c.col < 0 || c.col >= width) {
            throw std::invalid_argument("gridworld_build: cell out of range");
        }
        return cells[static_cast<std::size_t>(c.row) * width + c.col];
    };
    for (const Cell& h : hazard_cells) at(h) = 'H';
    for (const auto& [cell, drift] : drift_cells) {
        if (at(cell) == 'H') {
            throw std::invalid_argument("gridworld_build: drift cell collides with hazard");
        }
        at(cell) = drift_char(drift);
    }
    return build_from_cells(width, height, std::move(cells));
}

GridWorld default_gridworld() {
    std::vector<Cell> hazards = {
        {1, 1}, {1, 2}, {2, 1}, {2, 2},   // blob A
        {5, 5}, {5, 6}, {6, 5}, {6, 6},   // blob B
    };
    // Corridor (5,1)..(5,4) drifts right into blob B: entry cell is
    // 4-irrecoverable, so H = 4.
    std::vector<std::pair<Cell, Drift>> drifts = {
        {{5, 1}, Drift::kRight},
        {{5, 2}, Drift::kRight},
        {{5, 3}, Drift::kRight},
        {{5, 4}, Drift::kRight},
    };
    return gridworld_build(8, 8, hazards, drifts);
}

std::string gridworld_to_map(const GridWorld& gw) {
    std::string out;
    out.reserve(static_cast<std::size_t>(gw.height) * (gw.width + 1));
    for (int r = 0; r < gw.height; ++r) {
        out.append(gw.cells.begin() + static_cast<std::size_t>(r) * gw.width,
                   gw.cells.begin() + static_cast<std::size_t>(r + 1) * gw.width);
        out.push_back('\n');
    }
    return out;
}

GridWorld gridworld_from_map(const std::string& text) {
    std::vector<std::string> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(line);
    }
    if (rows.empty()) throw std::invalid_argument("gridworld_from_map: empty map");
    const int height = static_cast<int>(rows.size());
    const int width = static_cast<int>(rows[0].size());
    if (width < 3 || height < 3) {
        throw std::invalid_argument("gridworld_from_map: dimensions must be at least 3x3");
    }
    std::vector<char> cells;
    cells.reserve(static_cast<std::size_t>(width) * height);
    for (const std::string& row : rows) {
        if (static_cast<int>(row.size()) != width) {
            throw std::invalid_argument("gridworld_from_map: ragged rows");
        }
        for (char c : row) {
            if (c != '.' && c != 'H' && drift_dir(c) < 0) {
                throw std::invalid_argument(std::string("gridworld_from_map: bad cell '") + c + "'");
            }
            cells.push_back(c);
        }
    }
    return build_from_cells(width, height, std::move(cells));
}

} // namespace cbfrl
