#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cbfrl/types.hpp"

namespace cbfrl {

/// Explicit finite deterministic MDP: a dense next-state table and an
/// unsafe flag per state. Unsafe states are absorbing.
struct TabularMDP {
    int n_states = 0;
    int n_actions = 0;
    std::vector<int> next;          // next[s * n_actions + a]
    std::vector<std::uint8_t> unsafe;

    int successor(int state, int action) const { return next[state * n_actions + action]; }
    bool is_unsafe(int state) const { return unsafe[state] != 0; }
};

/// Grid cell, row-major indexing: state = row * width + col.
struct Cell {
    int row = 0;
    int col = 0;
};

enum class Drift { kUp, kRight, kDown, kLeft };

/// 4-action gridworld (0 up, 1 right, 2 down, 3 left; moving off the grid
/// stays in place). Hazard cells form the unsafe set and absorb. Drift
/// cells move in their fixed direction regardless of the chosen action,
/// so a drift corridor of length k into a hazard makes its entry cell
/// k-irrecoverable by construction.
struct GridWorld {
    int width = 0;
    int height = 0;
    std::vector<char> cells;        // '.', 'H', '^', '>', 'v', '<'
    TabularMDP mdp;

    int state_of(Cell c) const { return c.row * width + c.col; }
    char cell_at(int state) const { return cells[state]; }
};

/// Builds the grid and its transition table. Throws if dimensions are
/// below 3x3, if a cell index is out of range, or if hazards cover every
/// cell (only trivial barrier candidates would exist).
GridWorld gridworld_build(int width, int height,
                          const std::vector<Cell>& hazard_cells,
                          const std::vector<std::pair<Cell, Drift>>& drift_cells);

/// The stock analysis grid: 8x8, two 2x2 hazard blobs and one length-4
/// drift corridor feeding a hazard, so the irrecoverability horizon is 4.
GridWorld default_gridworld();

/// Plain-text map format, one char per cell ('.' safe, 'H' hazard,
/// '^' '>' 'v' '<' drift), one row per line.
std::string gridworld_to_map(const GridWorld& gw);
GridWorld gridworld_from_map(const std::string& text);

} // namespace cbfrl
