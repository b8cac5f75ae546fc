#ifndef WARPCONV_WARP_CORE_HPP
#define WARPCONV_WARP_CORE_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace warpconv {

/// Largest filter length the exhaustive path enumerator accepts unless the
/// caller raises the cap explicitly.
inline constexpr std::size_t kOracleCap = 12;

/// Raised when an exhaustive routine is asked for a dimension above its cap.
class OracleTooLarge : public std::length_error {
public:
    using std::length_error::length_error;
};

struct Cell {
    std::size_t row = 0;
    std::size_t col = 0;

    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Unit moves between consecutive path cells. The enumerator and the solvers
/// order candidate paths lexicographically by this ordering.
enum class Step : std::uint8_t {
    Diagonal = 0,    // (+1, +1)
    Vertical = 1,    // (+1 row, same col)
    Horizontal = 2,  // (same row, +1 col)
};

enum class NormalizationMode { Symmetric, XOntoW, WOntoX };

std::string_view to_string(NormalizationMode mode);
/// Accepts "symmetric", "x-onto-w", "w-onto-x" (underscores also accepted).
NormalizationMode parse_normalization(std::string_view text);

/// Sakoe-Chiba band: cell (i, j) is admissible iff |i - j| <= radius.
struct BandConfig {
    std::size_t radius = 0;

    static constexpr BandConfig unconstrained() {
        return BandConfig{std::numeric_limits<std::size_t>::max()};
    }

    constexpr bool admits(std::size_t row, std::size_t col) const {
        const std::size_t dev = row > col ? row - col : col - row;
        return dev <= radius;
    }

    friend bool operator==(const BandConfig&, const BandConfig&) = default;
};

/// Monotone, continuous warping path through an n x n grid from (0,0) to
/// (n-1,n-1). Invariants are checked on construction.
class WarpPath {
public:
    WarpPath(std::size_t n, std::vector<Cell> cells);

    static WarpPath diagonal(std::size_t n);
    static WarpPath from_steps(std::size_t n, std::span<const Step> steps);

    std::size_t dimension() const { return n_; }
    std::size_t size() const { return cells_.size(); }
    const std::vector<Cell>& cells() const { return cells_; }
    const Cell& operator[](std::size_t k) const { return cells_[k]; }

    std::vector<Step> steps() const;
    bool within(BandConfig band) const;

    friend bool operator==(const WarpPath&, const WarpPath&) = default;

private:
    std::size_t n_;
    std::vector<Cell> cells_;
};

std::string format_path(const WarpPath& path);

/// Step between two adjacent path cells; the pair must differ by a unit move.
Step step_between(const Cell& from, const Cell& to);

/// Deterministic preference among equal-cost paths: the shorter path wins,
/// and among equal lengths the lexicographically smaller step sequence
/// (diagonal < vertical < horizontal).
bool preferred_on_tie(const WarpPath& a, const WarpPath& b);

/// D[i][j] = w_i * x_j, stored row-major.
class ProductMatrix {
public:
    /// Rank-one outer product of arbitrary-length sequences.
    static ProductMatrix outer(std::span<const double> w, std::span<const double> x);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }
    std::size_t dimension() const { return rows_; }

    double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
    std::span<const double> row(std::size_t i) const {
        return {entries_.data() + i * cols_, cols_};
    }

private:
    ProductMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> entries_;
};

/// Square product matrix of a filter and an equal-length input window.
ProductMatrix product_matrix(std::span<const double> w, std::span<const double> x);

/// Normalized path cost, evaluated from D and the path's run structure alone.
///   Symmetric: (sum of D over the path) / K.
///   XOntoW:    sum over rows of the mean of D over the row's column run.
///   WOntoX:    sum over columns of the mean of D over the column's row run.
double path_cost(const WarpPath& path, const ProductMatrix& d, NormalizationMode mode);

/// Per-cell weight u(p_k) aligned with path.cells().
std::vector<double> cell_weights(const WarpPath& path, NormalizationMode mode);

/// Dense n x n matrix U with w U x' = path_cost(path, product_matrix(w, x), mode).
class AlignmentMatrix {
public:
    AlignmentMatrix(WarpPath path, NormalizationMode mode);

    std::size_t dimension() const { return path_.dimension(); }
    const WarpPath& source_path() const { return path_; }
    NormalizationMode mode() const { return mode_; }

    double operator()(std::size_t i, std::size_t j) const { return entries_[i * dimension() + j]; }
    std::span<const double> entries() const { return entries_; }

    double row_sum(std::size_t i) const;
    double col_sum(std::size_t j) const;
    double total() const;

    /// U x'
    std::vector<double> apply(std::span<const double> x) const;
    /// w U
    std::vector<double> left_apply(std::span<const double> w) const;
    /// w U x'
    double bilinear(std::span<const double> w, std::span<const double> x) const;

private:
    WarpPath path_;
    NormalizationMode mode_;
    std::vector<double> entries_;
};

AlignmentMatrix build_alignment_matrix(const WarpPath& path, NormalizationMode mode, std::size_t n);

using PathVisitor = std::function<void(const WarpPath&)>;

/// Visits every band-admissible path of dimension n in lexicographic step
/// order. Refuses n above `cap`.
void for_each_path(std::size_t n, BandConfig band, const PathVisitor& visit,
                   std::size_t cap = kOracleCap);

std::vector<WarpPath> enumerate_paths(std::size_t n, BandConfig band, std::size_t cap = kOracleCap);

/// Unconstrained cumulative-cost DTW distance with local distance |q_n - c_m|.
double classic_dtw(std::span<const double> q, std::span<const double> c);

}  // namespace warpconv

#endif  // WARPCONV_WARP_CORE_HPP
