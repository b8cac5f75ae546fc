#include "warpconv/warp_solver.hpp"

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <optional>

namespace warpconv {

namespace {

std::size_t band_lo(std::size_t idx, BandConfig band) { return idx > band.radius ? idx - band.radius : 0; }

std::size_t band_hi(std::size_t idx, std::size_t n, BandConfig band) {
    return band.radius >= n ? n - 1 : std::min(n - 1, idx + band.radius);
}

// Equal-length cell sequences starting at (0,0): lexicographic on steps.
bool lex_less(const std::vector<Cell>& a, const std::vector<Cell>& b) {
    assert(a.size() == b.size());
    for (std::size_t k = 1; k < a.size(); ++k) {
        if (a[k] == b[k]) continue;
        return step_between(a[k - 1], a[k]) < step_between(b[k - 1], b[k]);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Run decomposition DP shared by XOntoW (runs along rows) and WOntoX (runs
// along columns). "major" indexes the grouping axis, "minor" the run axis.

struct RunState {
    double cost = 0.0;
    std::size_t length = 0;
    std::size_t start = 0;     // first minor index of this major's run
    std::size_t prev_end = 0;  // run end of the previous major
    bool reachable = false;
};

class RunSolver {
public:
    RunSolver(const ProductMatrix& d, BandConfig band, bool transposed)
        : d_(d), n_(d.dimension()), band_(band), transposed_(transposed), table_(n_ * n_) {}

    PathSolution run() {
        {
            const std::size_t hi = band_hi(0, n_, band_);
            double sum = 0.0;
            for (std::size_t b = 0; b <= hi; ++b) {
                sum += value(0, b);
                RunState& s = at(0, b);
                s.cost = 0.0 + sum / static_cast<double>(b + 1);
                s.length = b + 1;
                s.start = 0;
                s.reachable = true;
            }
        }
        for (std::size_t m = 1; m < n_; ++m) {
            const std::size_t lo = band_lo(m, band_);
            const std::size_t hi = band_hi(m, n_, band_);
            for (std::size_t a = lo; a <= hi; ++a) {
                // The previous run ended at a (same minor) or a-1 (diagonal).
                std::size_t preds[2];
                std::size_t npred = 0;
                if (a >= 1 && at(m - 1, a - 1).reachable) preds[npred++] = a - 1;
                if (at(m - 1, a).reachable) preds[npred++] = a;
                if (npred == 0) continue;
                double sum = 0.0;
                for (std::size_t b = a; b <= hi; ++b) {
                    sum += value(m, b);
                    const double term = sum / static_cast<double>(b - a + 1);
                    for (std::size_t p = 0; p < npred; ++p) {
                        const RunState& prev = at(m - 1, preds[p]);
                        offer(m, b, prev.cost + term, prev.length + (b - a + 1), a, preds[p]);
                    }
                }
            }
        }
        const RunState& fin = at(n_ - 1, n_ - 1);
        assert(fin.reachable);
        return {fin.cost, WarpPath(n_, cells_of(n_ - 1, fin.start, n_ - 1, fin.prev_end))};
    }

private:
    double value(std::size_t major, std::size_t minor) const {
        return transposed_ ? d_(minor, major) : d_(major, minor);
    }

    RunState& at(std::size_t major, std::size_t end) { return table_[major * n_ + end]; }

    void offer(std::size_t m, std::size_t b, double cost, std::size_t length, std::size_t start,
               std::size_t prev_end) {
        RunState& s = at(m, b);
        bool take = !s.reachable || cost > s.cost;
        if (!take && cost == s.cost) {
            if (length != s.length)
                take = length < s.length;
            else
                take = lex_less(cells_of(m, start, b, prev_end), cells_of(m, s.start, b, s.prev_end));
        }
        if (!take) return;
        s.cost = cost;
        s.length = length;
        s.start = start;
        s.prev_end = prev_end;
        s.reachable = true;
    }

    // Cells of the prefix whose last run is [start, end] at major m, preceded
    // by the stored best prefix ending at (m-1, prev_end).
    std::vector<Cell> cells_of(std::size_t m, std::size_t start, std::size_t end, std::size_t prev_end) {
        std::vector<std::pair<std::size_t, std::size_t>> runs(m + 1);
        runs[m] = {start, end};
        std::size_t e = prev_end;
        for (std::size_t k = m; k-- > 0;) {
            const RunState& s = at(k, e);
            runs[k] = {s.start, e};
            e = s.prev_end;
        }
        std::vector<Cell> cells;
        cells.reserve(2 * n_ - 1);
        for (std::size_t k = 0; k <= m; ++k)
            for (std::size_t j = runs[k].first; j <= runs[k].second; ++j)
                cells.push_back(transposed_ ? Cell{j, k} : Cell{k, j});
        return cells;
    }

    const ProductMatrix& d_;
    std::size_t n_;
    BandConfig band_;
    bool transposed_;
    std::vector<RunState> table_;
};

// ---------------------------------------------------------------------------
// Symmetric: state (i, j, l) holds the best sum over l-cell prefixes ending at
// (i, j). Length is uniform within a state, so the sum alone orders prefixes.

class SymmetricSolver {
public:
    SymmetricSolver(const ProductMatrix& d, BandConfig band)
        : d_(d), n_(d.dimension()), lmax_(2 * n_ - 1), band_(band), sum_(n_ * n_ * (lmax_ + 1), 0.0),
          from_(n_ * n_ * (lmax_ + 1), kUnreached) {}

    PathSolution run() {
        sum_[index(0, 0, 1)] = 0.0 + d_(0, 0);
        from_[index(0, 0, 1)] = kOrigin;
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t lo = band_lo(i, band_);
            const std::size_t hi = band_hi(i, n_, band_);
            for (std::size_t j = lo; j <= hi; ++j) {
                if (i == 0 && j == 0) continue;
                const double dij = d_(i, j);
                for (std::size_t l = std::max(i, j) + 1; l <= i + j + 1; ++l) {
                    if (i >= 1 && j >= 1) offer(i, j, l, i - 1, j - 1, Step::Diagonal, dij);
                    if (i >= 1) offer(i, j, l, i - 1, j, Step::Vertical, dij);
                    if (j >= 1) offer(i, j, l, i, j - 1, Step::Horizontal, dij);
                }
            }
        }
        const std::size_t last = n_ - 1;
        bool found = false;
        double best = 0.0;
        std::size_t best_len = 0;
        for (std::size_t l = n_; l <= lmax_; ++l) {
            const std::size_t idx = index(last, last, l);
            if (from_[idx] == kUnreached) continue;
            const double cost = sum_[idx] / static_cast<double>(l);
            if (!found || cost > best) {
                found = true;
                best = cost;
                best_len = l;
            }
        }
        assert(found);
        return {best, WarpPath(n_, backtrack(last, last, best_len))};
    }

private:
    static constexpr std::uint8_t kUnreached = 0xff;
    static constexpr std::uint8_t kOrigin = 0xfe;

    std::size_t index(std::size_t i, std::size_t j, std::size_t l) const { return (i * n_ + j) * (lmax_ + 1) + l; }

    void offer(std::size_t i, std::size_t j, std::size_t l, std::size_t pi, std::size_t pj, Step step, double dij) {
        if (!band_.admits(pi, pj)) return;
        const std::size_t pidx = index(pi, pj, l - 1);
        if (from_[pidx] == kUnreached) return;
        const double cand = sum_[pidx] + dij;
        const std::size_t idx = index(i, j, l);
        bool take = from_[idx] == kUnreached || cand > sum_[idx];
        if (!take && cand == sum_[idx]) {
            auto challenger = backtrack(pi, pj, l - 1);
            challenger.push_back({i, j});
            take = lex_less(challenger, backtrack(i, j, l));
        }
        if (!take) return;
        sum_[idx] = cand;
        from_[idx] = static_cast<std::uint8_t>(step);
    }

    std::vector<Cell> backtrack(std::size_t i, std::size_t j, std::size_t l) const {
        std::vector<Cell> cells(l);
        for (std::size_t k = l; k-- > 0;) {
            cells[k] = {i, j};
            const std::uint8_t f = from_[index(i, j, k + 1)];
            if (f == kOrigin) break;
            const auto step = static_cast<Step>(f);
            if (step != Step::Horizontal) --i;
            if (step != Step::Vertical) --j;
        }
        return cells;
    }

    const ProductMatrix& d_;
    std::size_t n_;
    std::size_t lmax_;
    BandConfig band_;
    std::vector<double> sum_;
    std::vector<std::uint8_t> from_;
};

void require_square(const ProductMatrix& d) {
    if (!d.square())
        throw std::invalid_argument("solve: product matrix must be square, got " + std::to_string(d.rows()) +
                                    "x" + std::to_string(d.cols()));
}

}  // namespace

PathSolution solve_path(const ProductMatrix& d, NormalizationMode mode, BandConfig band) {
    require_square(d);
    switch (mode) {
    case NormalizationMode::Symmetric: return SymmetricSolver(d, band).run();
    case NormalizationMode::XOntoW: return RunSolver(d, band, false).run();
    case NormalizationMode::WOntoX: return RunSolver(d, band, true).run();
    }
    throw std::invalid_argument("solve: bad mode");
}

SolveResult solve(const ProductMatrix& d, NormalizationMode mode, BandConfig band) {
    auto sol = solve_path(d, mode, band);
    AlignmentMatrix u(sol.optimal_path, mode);
    return {sol.optimal_cost, std::move(sol.optimal_path), std::move(u)};
}

SolveResult solve_bruteforce(const ProductMatrix& d, NormalizationMode mode, BandConfig band, std::size_t cap) {
    require_square(d);
    const std::size_t n = d.dimension();
    if (n > cap)
        throw OracleTooLarge("solve_bruteforce refused: n=" + std::to_string(n) + " exceeds cap " +
                             std::to_string(cap));
    std::optional<WarpPath> best_path;
    double best = 0.0;
    for_each_path(
        n, band,
        [&](const WarpPath& p) {
            const double c = path_cost(p, d, mode);
            if (!best_path || c > best || (c == best && preferred_on_tie(p, *best_path))) {
                best = c;
                best_path = p;
            }
        },
        cap);
    AlignmentMatrix u(*best_path, mode);
    return {best, std::move(*best_path), std::move(u)};
}

}  // namespace warpconv
