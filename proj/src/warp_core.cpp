#include "warpconv/warp_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace warpconv {

std::string_view to_string(NormalizationMode mode) {
    switch (mode) {
    case NormalizationMode::Symmetric: return "symmetric";
    case NormalizationMode::XOntoW: return "x-onto-w";
    case NormalizationMode::WOntoX: return "w-onto-x";
    }
    return "unknown";
}

NormalizationMode parse_normalization(std::string_view text) {
    std::string key(text);
    std::replace(key.begin(), key.end(), '_', '-');
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (key == "symmetric") return NormalizationMode::Symmetric;
    if (key == "x-onto-w") return NormalizationMode::XOntoW;
    if (key == "w-onto-x") return NormalizationMode::WOntoX;
    throw std::invalid_argument("unknown normalization mode '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// WarpPath

WarpPath::WarpPath(std::size_t n, std::vector<Cell> cells) : n_(n), cells_(std::move(cells)) {
    if (n_ == 0) throw std::invalid_argument("WarpPath: dimension must be >= 1");
    if (cells_.size() < n_ || cells_.size() > 2 * n_ - 1)
        throw std::invalid_argument("WarpPath: length " + std::to_string(cells_.size()) +
                                    " outside [N, 2N-1] for N=" + std::to_string(n_));
    if (cells_.front() != Cell{0, 0} || cells_.back() != Cell{n_ - 1, n_ - 1})
        throw std::invalid_argument("WarpPath: boundary condition violated");
    for (std::size_t k = 1; k < cells_.size(); ++k) {
        const Cell& a = cells_[k - 1];
        const Cell& b = cells_[k];
        if (b.row < a.row || b.col < a.col)
            throw std::invalid_argument("WarpPath: monotonicity violated at cell " + std::to_string(k));
        const std::size_t dr = b.row - a.row;
        const std::size_t dc = b.col - a.col;
        if (dr > 1 || dc > 1 || (dr == 0 && dc == 0))
            throw std::invalid_argument("WarpPath: continuity violated at cell " + std::to_string(k));
    }
}

WarpPath WarpPath::diagonal(std::size_t n) {
    std::vector<Cell> cells;
    cells.reserve(n);
    for (std::size_t i = 0; i < n; ++i) cells.push_back({i, i});
    return WarpPath(n, std::move(cells));
}

WarpPath WarpPath::from_steps(std::size_t n, std::span<const Step> steps) {
    std::vector<Cell> cells;
    cells.reserve(steps.size() + 1);
    Cell c{0, 0};
    cells.push_back(c);
    for (Step s : steps) {
        if (s != Step::Horizontal) ++c.row;
        if (s != Step::Vertical) ++c.col;
        cells.push_back(c);
    }
    return WarpPath(n, std::move(cells));
}

Step step_between(const Cell& from, const Cell& to) {
    const bool dr = to.row == from.row + 1;
    const bool dc = to.col == from.col + 1;
    if (dr && dc) return Step::Diagonal;
    if (dr && to.col == from.col) return Step::Vertical;
    if (dc && to.row == from.row) return Step::Horizontal;
    throw std::invalid_argument("step_between: cells are not adjacent");
}

std::vector<Step> WarpPath::steps() const {
    std::vector<Step> out;
    out.reserve(cells_.size() - 1);
    for (std::size_t k = 1; k < cells_.size(); ++k) out.push_back(step_between(cells_[k - 1], cells_[k]));
    return out;
}

bool WarpPath::within(BandConfig band) const {
    return std::all_of(cells_.begin(), cells_.end(),
                       [&](const Cell& c) { return band.admits(c.row, c.col); });
}

std::string format_path(const WarpPath& path) {
    std::ostringstream os;
    os << '{';
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (k) os << ',';
        os << '(' << path[k].row << ',' << path[k].col << ')';
    }
    os << '}';
    return os.str();
}

bool preferred_on_tie(const WarpPath& a, const WarpPath& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    // Equal lengths: the first differing cell decides, and the step taken into
    // it orders as diagonal < vertical < horizontal.
    for (std::size_t k = 1; k < a.size(); ++k) {
        if (a[k] == b[k]) continue;
        return step_between(a[k - 1], a[k]) < step_between(b[k - 1], b[k]);
    }
    return false;
}

// ---------------------------------------------------------------------------
// ProductMatrix

ProductMatrix::ProductMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {}

ProductMatrix ProductMatrix::outer(std::span<const double> w, std::span<const double> x) {
    if (w.empty() || x.empty()) throw std::invalid_argument("product matrix: empty sequence");
    std::vector<double> entries(w.size() * x.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) entries[i * x.size() + j] = w[i] * x[j];
    return ProductMatrix(w.size(), x.size(), std::move(entries));
}

ProductMatrix product_matrix(std::span<const double> w, std::span<const double> x) {
    if (w.size() != x.size())
        throw std::invalid_argument("product_matrix: length mismatch (" + std::to_string(w.size()) +
                                    " vs " + std::to_string(x.size()) + ")");
    return ProductMatrix::outer(w, x);
}

// ---------------------------------------------------------------------------
// Costs and weights

namespace {

void check_dimension(const WarpPath& path, const ProductMatrix& d) {
    if (!d.square() || d.dimension() != path.dimension())
        throw std::invalid_argument("path_cost: path dimension " + std::to_string(path.dimension()) +
                                    " does not match matrix " + std::to_string(d.rows()) + "x" +
                                    std::to_string(d.cols()));
}

// Sums D over maximal runs of cells sharing the grouping coordinate and adds
// run_sum / run_length in path order. The solvers accumulate in the same order.
template <class Key>
double run_normalized_cost(const WarpPath& path, const ProductMatrix& d, Key key) {
    const auto& cells = path.cells();
    double total = 0.0;
    std::size_t k = 0;
    while (k < cells.size()) {
        const std::size_t group = key(cells[k]);
        double sum = 0.0;
        std::size_t count = 0;
        for (; k < cells.size() && key(cells[k]) == group; ++k, ++count) sum += d(cells[k].row, cells[k].col);
        total += sum / static_cast<double>(count);
    }
    return total;
}

template <class Key>
std::vector<double> run_weights(const WarpPath& path, Key key) {
    const auto& cells = path.cells();
    std::vector<double> weights(cells.size());
    std::size_t k = 0;
    while (k < cells.size()) {
        std::size_t end = k;
        while (end < cells.size() && key(cells[end]) == key(cells[k])) ++end;
        const double w = 1.0 / static_cast<double>(end - k);
        std::fill(weights.begin() + static_cast<std::ptrdiff_t>(k),
                  weights.begin() + static_cast<std::ptrdiff_t>(end), w);
        k = end;
    }
    return weights;
}

constexpr auto by_row = [](const Cell& c) { return c.row; };
constexpr auto by_col = [](const Cell& c) { return c.col; };

}  // namespace

double path_cost(const WarpPath& path, const ProductMatrix& d, NormalizationMode mode) {
    check_dimension(path, d);
    switch (mode) {
    case NormalizationMode::Symmetric: {
        double sum = 0.0;
        for (const Cell& c : path.cells()) sum += d(c.row, c.col);
        return sum / static_cast<double>(path.size());
    }
    case NormalizationMode::XOntoW: return run_normalized_cost(path, d, by_row);
    case NormalizationMode::WOntoX: return run_normalized_cost(path, d, by_col);
    }
    throw std::invalid_argument("path_cost: bad mode");
}

std::vector<double> cell_weights(const WarpPath& path, NormalizationMode mode) {
    switch (mode) {
    case NormalizationMode::Symmetric:
        return std::vector<double>(path.size(), 1.0 / static_cast<double>(path.size()));
    case NormalizationMode::XOntoW: return run_weights(path, by_row);
    case NormalizationMode::WOntoX: return run_weights(path, by_col);
    }
    throw std::invalid_argument("cell_weights: bad mode");
}

// ---------------------------------------------------------------------------
// AlignmentMatrix

AlignmentMatrix::AlignmentMatrix(WarpPath path, NormalizationMode mode)
    : path_(std::move(path)), mode_(mode), entries_(path_.dimension() * path_.dimension(), 0.0) {
    const auto weights = cell_weights(path_, mode_);
    const std::size_t n = path_.dimension();
    for (std::size_t k = 0; k < path_.size(); ++k) entries_[path_[k].row * n + path_[k].col] = weights[k];
}

double AlignmentMatrix::row_sum(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < dimension(); ++j) s += (*this)(i, j);
    return s;
}

double AlignmentMatrix::col_sum(std::size_t j) const {
    double s = 0.0;
    for (std::size_t i = 0; i < dimension(); ++i) s += (*this)(i, j);
    return s;
}

double AlignmentMatrix::total() const {
    double s = 0.0;
    for (double v : entries_) s += v;
    return s;
}

std::vector<double> AlignmentMatrix::apply(std::span<const double> x) const {
    const std::size_t n = dimension();
    if (x.size() != n) throw std::invalid_argument("AlignmentMatrix::apply: length mismatch");
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i] += (*this)(i, j) * x[j];
    return out;
}

std::vector<double> AlignmentMatrix::left_apply(std::span<const double> w) const {
    const std::size_t n = dimension();
    if (w.size() != n) throw std::invalid_argument("AlignmentMatrix::left_apply: length mismatch");
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j] += w[i] * (*this)(i, j);
    return out;
}

double AlignmentMatrix::bilinear(std::span<const double> w, std::span<const double> x) const {
    const auto ux = apply(x);
    if (w.size() != ux.size()) throw std::invalid_argument("AlignmentMatrix::bilinear: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < ux.size(); ++i) s += w[i] * ux[i];
    return s;
}

AlignmentMatrix build_alignment_matrix(const WarpPath& path, NormalizationMode mode, std::size_t n) {
    if (path.dimension() != n)
        throw std::invalid_argument("build_alignment_matrix: path dimension does not match n");
    return AlignmentMatrix(path, mode);
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

struct Enumerator {
    std::size_t n;
    BandConfig band;
    const PathVisitor& visit;
    std::vector<Cell> cells;

    void extend() {
        const Cell cur = cells.back();
        if (cur.row == n - 1 && cur.col == n - 1) {
            visit(WarpPath(n, cells));
            return;
        }
        // Diagonal, vertical, horizontal: lexicographic order on steps.
        const Cell next[3] = {{cur.row + 1, cur.col + 1}, {cur.row + 1, cur.col}, {cur.row, cur.col + 1}};
        for (const Cell& c : next) {
            if (c.row >= n || c.col >= n || !band.admits(c.row, c.col)) continue;
            cells.push_back(c);
            extend();
            cells.pop_back();
        }
    }
};

}  // namespace

void for_each_path(std::size_t n, BandConfig band, const PathVisitor& visit, std::size_t cap) {
    if (n == 0) throw std::invalid_argument("for_each_path: n must be >= 1");
    if (n > cap)
        throw OracleTooLarge("path enumeration refused: n=" + std::to_string(n) + " exceeds cap " +
                             std::to_string(cap));
    Enumerator e{n, band, visit, {}};
    e.cells.reserve(2 * n - 1);
    e.cells.push_back({0, 0});
    e.extend();
}

std::vector<WarpPath> enumerate_paths(std::size_t n, BandConfig band, std::size_t cap) {
    std::vector<WarpPath> out;
    for_each_path(n, band, [&](const WarpPath& p) { out.push_back(p); }, cap);
    return out;
}

// ---------------------------------------------------------------------------
// Classic DTW

double classic_dtw(std::span<const double> q, std::span<const double> c) {
    if (q.empty() || c.empty()) throw std::invalid_argument("classic_dtw: empty sequence");
    const std::size_t rows = q.size();
    const std::size_t cols = c.size();
    std::vector<double> g(rows * cols);
    auto at = [&](std::size_t i, std::size_t j) -> double& { return g[i * cols + j]; };
    auto dist = [&](std::size_t i, std::size_t j) { return std::abs(q[i] - c[j]); };

    at(0, 0) = dist(0, 0);
    for (std::size_t j = 1; j < cols; ++j) at(0, j) = at(0, j - 1) + dist(0, j);
    for (std::size_t i = 1; i < rows; ++i) at(i, 0) = at(i - 1, 0) + dist(i, 0);
    for (std::size_t i = 1; i < rows; ++i)
        for (std::size_t j = 1; j < cols; ++j)
            at(i, j) = std::min({at(i - 1, j - 1), at(i - 1, j), at(i, j - 1)}) + dist(i, j);
    return at(rows - 1, cols - 1);
}

}  // namespace warpconv
