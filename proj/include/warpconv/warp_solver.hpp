#ifndef WARPCONV_WARP_SOLVER_HPP
#define WARPCONV_WARP_SOLVER_HPP

#include "warpconv/warp_core.hpp"

namespace warpconv {

struct PathSolution {
    double optimal_cost;
    WarpPath optimal_path;
};

struct SolveResult {
    double optimal_cost;
    WarpPath optimal_path;
    AlignmentMatrix u_star;
};

/*
 * Exact maximization of the normalized path cost over all band-admissible
 * paths through a square product matrix.
 *
 * XOntoW / WOntoX use a run decomposition: a path visits one contiguous run
 * per row (resp. column) and the next run starts at the previous run's end or
 * one past it, so the cost is additive over runs. Symmetric keeps one state
 * per (cell, path length) holding the best unnormalized sum and divides at the
 * corner.
 *
 * Both accumulate in path order exactly as path_cost does, so the returned
 * cost equals path_cost(optimal_path) bit for bit. Ties go to the shorter
 * path, then to the lexicographically smaller step sequence.
 */
PathSolution solve_path(const ProductMatrix& d, NormalizationMode mode, BandConfig band);

SolveResult solve(const ProductMatrix& d, NormalizationMode mode, BandConfig band);

/// Exhaustive reference: evaluates every enumerated path.
SolveResult solve_bruteforce(const ProductMatrix& d, NormalizationMode mode, BandConfig band,
                             std::size_t cap = kOracleCap);

}  // namespace warpconv

#endif  // WARPCONV_WARP_SOLVER_HPP
