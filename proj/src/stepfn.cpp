#include "hypermax/stepfn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace hypermax {

namespace {

std::size_t pow_size(int base, int exp) {
    std::size_t out = 1;
    for (int i = 0; i < exp; ++i) out *= static_cast<std::size_t>(base);
    return out;
}

// Odometer over full multi-indices [0,m)^d, row-major order.
bool next_multi_index(std::vector<int>& idx, int m) {
    for (int pos = static_cast<int>(idx.size()) - 1; pos >= 0; --pos) {
        if (++idx[static_cast<std::size_t>(pos)] < m) return true;
        idx[static_cast<std::size_t>(pos)] = 0;
    }
    return false;
}

double pi_product(const std::vector<double>& pi, const std::vector<int>& idx) {
    double p = 1.0;
    for (int i : idx) p *= pi[static_cast<std::size_t>(i)];
    return p;
}

} // namespace

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::RealValued: return "real";
        case Mode::GraphonUnit: return "graphon";
        case Mode::GraphonInterior: return "graphon-interior";
    }
    return "real";
}

Mode mode_from_name(const std::string& name) {
    if (name == "real") return Mode::RealValued;
    if (name == "graphon") return Mode::GraphonUnit;
    if (name == "graphon-interior") return Mode::GraphonInterior;
    raise(ErrorCode::ValidationError, "unknown mode '" + name + "'");
}

long long step_parameter_count(const Signature& sig, int m) {
    long long total = 0;
    for (int k = 0; k < sig.relation_count(); ++k) {
        const int d = sig.arity(k);
        // C(m+d-1, d)
        long long c = 1;
        for (int i = 1; i <= d; ++i) c = c * (m + d - i) / i;
        total += c;
    }
    return total;
}

std::vector<std::vector<int>> canonical_multi_indices(int m, int d) {
    std::vector<std::vector<int>> out;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    while (true) {
        out.push_back(idx);
        int pos = d - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == m - 1) --pos;
        if (pos < 0) break;
        const int v = ++idx[static_cast<std::size_t>(pos)];
        for (int p = pos + 1; p < d; ++p) idx[static_cast<std::size_t>(p)] = v;
    }
    return out;
}

StepFunction StepFunction::make(const Signature& sig, std::vector<double> pi,
                                std::vector<std::vector<double>> arrays, Mode mode) {
    StepFunction w;
    w.sig_ = sig;
    w.mode_ = mode;
    w.m_ = static_cast<int>(pi.size());
    if (w.m_ < 1) raise(ErrorCode::SimplexViolation, "partition vector is empty");

    double sum = 0.0;
    for (double p : pi) {
        if (!(p >= 0.0)) raise(ErrorCode::SimplexViolation, "negative partition weight");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        raise(ErrorCode::SimplexViolation,
              "partition weights sum to " + std::to_string(sum));
    w.pi_ = std::move(pi);

    if (static_cast<int>(arrays.size()) != sig.relation_count())
        raise(ErrorCode::ValidationError, "array count does not match relation count");
    for (int k = 0; k < sig.relation_count(); ++k) {
        const int d = sig.arity(k);
        if (arrays[static_cast<std::size_t>(k)].size() != pow_size(w.m_, d))
            raise(ErrorCode::ValidationError,
                  "relation " + std::to_string(k) + " array has wrong size");
    }
    w.arrays_ = std::move(arrays);

    // Symmetrize by orbit averaging; reject if the input deviated too much.
    double max_dev = 0.0;
    for (int k = 0; k < sig.relation_count(); ++k) {
        const int d = sig.arity(k);
        for (const auto& canon : canonical_multi_indices(w.m_, d)) {
            const auto orbit = index_orbit(canon);
            double avg = 0.0;
            for (const auto& o : orbit) avg += w.arrays_[static_cast<std::size_t>(k)][w.flat_index(k, o)];
            avg /= static_cast<double>(orbit.size());
            for (const auto& o : orbit) {
                double& v = w.arrays_[static_cast<std::size_t>(k)][w.flat_index(k, o)];
                max_dev = std::max(max_dev, std::abs(v - avg));
                v = avg;
            }
        }
    }
    if (max_dev >= 1e-9)
        raise(ErrorCode::SymmetryViolation,
              "array symmetry deviation " + std::to_string(max_dev));

    w.check_range(mode);
    return w;
}

StepFunction StepFunction::raw(Signature sig, std::vector<double> pi,
                               std::vector<std::vector<double>> arrays, Mode mode) {
    StepFunction w;
    w.sig_ = std::move(sig);
    w.mode_ = mode;
    w.m_ = static_cast<int>(pi.size());
    w.pi_ = std::move(pi);
    w.arrays_ = std::move(arrays);
    return w;
}

void StepFunction::check_range(Mode mode) const {
    if (mode == Mode::RealValued) {
        for (const auto& arr : arrays_)
            for (double v : arr)
                if (!std::isfinite(v)) raise(ErrorCode::RangeViolation, "non-finite entry");
        return;
    }
    for (const auto& arr : arrays_) {
        for (double v : arr) {
            if (!std::isfinite(v)) raise(ErrorCode::RangeViolation, "non-finite entry");
            if (mode == Mode::GraphonUnit && (v < 0.0 || v > 1.0))
                raise(ErrorCode::RangeViolation, "entry " + std::to_string(v) + " outside [0,1]");
            if (mode == Mode::GraphonInterior && (v <= 0.0 || v >= 1.0))
                raise(ErrorCode::RangeViolation, "entry " + std::to_string(v) + " outside (0,1)");
        }
    }
}

StepFunction StepFunction::from_finite_graph(const Signature& sig, const MultiHypergraph& graph) {
    if (graph.n_vertices < 1) raise(ErrorCode::EmptyGraph, "graph has no vertices");
    const MultiHypergraph g = validate_and_canonicalize(sig, graph);
    const int n = g.n_vertices;
    std::vector<double> pi(static_cast<std::size_t>(n), 1.0 / n);
    std::vector<std::vector<double>> arrays;
    arrays.reserve(static_cast<std::size_t>(sig.relation_count()));
    for (int k = 0; k < sig.relation_count(); ++k) {
        const int d = sig.arity(k);
        std::vector<double> arr(pow_size(n, d), 0.0);
        std::vector<int> idx(static_cast<std::size_t>(d), 0);
        std::size_t flat = 0;
        do {
            Tuple t(idx.begin(), idx.end());
            std::sort(t.begin(), t.end());
            const bool distinct = std::adjacent_find(t.begin(), t.end()) == t.end();
            if (distinct && g.has_edge(k, t)) arr[flat] = 1.0;
            ++flat;
        } while (next_multi_index(idx, n));
        arrays.push_back(std::move(arr));
    }
    return make(sig, std::move(pi), std::move(arrays), Mode::GraphonUnit);
}

StepFunction StepFunction::constant(const Signature& sig, double value, Mode mode) {
    std::vector<std::vector<double>> arrays;
    for (int k = 0; k < sig.relation_count(); ++k)
        arrays.emplace_back(1, value);
    return make(sig, {1.0}, std::move(arrays), mode);
}

std::size_t StepFunction::flat_index(int k, const std::vector<int>& idx) const {
    std::size_t flat = 0;
    for (int i : idx) flat = flat * static_cast<std::size_t>(m_) + static_cast<std::size_t>(i);
    (void)k;
    return flat;
}

double StepFunction::at(int k, const std::vector<int>& idx) const {
    return arrays_[static_cast<std::size_t>(k)][flat_index(k, idx)];
}

double& StepFunction::at_mut(int k, const std::vector<int>& idx) {
    return arrays_[static_cast<std::size_t>(k)][flat_index(k, idx)];
}

int StepFunction::cell_of(double x) const {
    if (x <= 0.0) return 0;
    double hi = 0.0;
    for (int i = 0; i < m_; ++i) {
        const double lo = hi;
        hi += pi_[static_cast<std::size_t>(i)];
        if (x > lo && x <= hi) return i;
    }
    return m_ - 1; // x beyond the accumulated boundary (rounding), last cell
}

double StepFunction::value_at(int k, const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != sig_.arity(k))
        raise(ErrorCode::IndexArityMismatch, "coordinate count does not match relation arity");
    std::vector<int> idx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) idx[i] = cell_of(x[i]);
    return at(k, idx);
}

StepFunction StepFunction::split(double lambda, int k) const {
    if (k < 0 || k >= m_) raise(ErrorCode::BadBlockIndex, "block index " + std::to_string(k));
    if (lambda < 0.0 || lambda > 1.0)
        raise(ErrorCode::ValidationError, "split weight outside [0,1]");
    const int m1 = m_ + 1;
    std::vector<double> pi(static_cast<std::size_t>(m1));
    for (int i = 0; i < m1; ++i) {
        if (i < k) pi[static_cast<std::size_t>(i)] = pi_[static_cast<std::size_t>(i)];
        else if (i == k) pi[static_cast<std::size_t>(i)] = lambda * pi_[static_cast<std::size_t>(k)];
        else if (i == k + 1) pi[static_cast<std::size_t>(i)] = (1.0 - lambda) * pi_[static_cast<std::size_t>(k)];
        else pi[static_cast<std::size_t>(i)] = pi_[static_cast<std::size_t>(i - 1)];
    }
    auto old_block = [k](int i) { return i <= k ? std::min(i, k) : (i == k + 1 ? k : i - 1); };

    StepFunction w;
    w.sig_ = sig_;
    w.mode_ = mode_;
    w.m_ = m1;
    w.pi_ = std::move(pi);
    w.arrays_.resize(arrays_.size());
    for (int rel = 0; rel < sig_.relation_count(); ++rel) {
        const int d = sig_.arity(rel);
        std::vector<double> arr(pow_size(m1, d));
        std::vector<int> idx(static_cast<std::size_t>(d), 0);
        std::vector<int> src(static_cast<std::size_t>(d), 0);
        std::size_t flat = 0;
        do {
            for (std::size_t i = 0; i < idx.size(); ++i) src[i] = old_block(idx[i]);
            arr[flat++] = at(rel, src);
        } while (next_multi_index(idx, m1));
        w.arrays_[static_cast<std::size_t>(rel)] = std::move(arr);
    }
    return w;
}

StepFunction StepFunction::permute_blocks(const std::vector<int>& perm) const {
    if (static_cast<int>(perm.size()) != m_)
        raise(ErrorCode::ValidationError, "permutation size mismatch");
    StepFunction w;
    w.sig_ = sig_;
    w.mode_ = mode_;
    w.m_ = m_;
    w.pi_.resize(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i)
        w.pi_[static_cast<std::size_t>(i)] = pi_[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    w.arrays_.resize(arrays_.size());
    for (int rel = 0; rel < sig_.relation_count(); ++rel) {
        const int d = sig_.arity(rel);
        std::vector<double> arr(pow_size(m_, d));
        std::vector<int> idx(static_cast<std::size_t>(d), 0);
        std::vector<int> src(static_cast<std::size_t>(d), 0);
        std::size_t flat = 0;
        do {
            for (std::size_t i = 0; i < idx.size(); ++i)
                src[i] = perm[static_cast<std::size_t>(idx[i])];
            arr[flat++] = at(rel, src);
        } while (next_multi_index(idx, m_));
        w.arrays_[static_cast<std::size_t>(rel)] = std::move(arr);
    }
    return w;
}

StepFunction StepFunction::drop_empty_blocks(double tol) const {
    std::vector<int> keep;
    double total = 0.0;
    for (int i = 0; i < m_; ++i) {
        if (pi_[static_cast<std::size_t>(i)] > tol) {
            keep.push_back(i);
            total += pi_[static_cast<std::size_t>(i)];
        }
    }
    if (keep.empty()) raise(ErrorCode::SimplexViolation, "all blocks empty");
    if (static_cast<int>(keep.size()) == m_) return *this;

    StepFunction w = permute_blocks_subset(keep);
    for (double& p : w.pi_) p /= total;
    return w;
}

StepFunction StepFunction::permute_blocks_subset(const std::vector<int>& keep) const {
    StepFunction w;
    w.sig_ = sig_;
    w.mode_ = mode_;
    w.m_ = static_cast<int>(keep.size());
    w.pi_.resize(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i)
        w.pi_[i] = pi_[static_cast<std::size_t>(keep[i])];
    w.arrays_.resize(arrays_.size());
    for (int rel = 0; rel < sig_.relation_count(); ++rel) {
        const int d = sig_.arity(rel);
        std::vector<double> arr(pow_size(w.m_, d));
        std::vector<int> idx(static_cast<std::size_t>(d), 0);
        std::vector<int> src(static_cast<std::size_t>(d), 0);
        std::size_t flat = 0;
        do {
            for (std::size_t i = 0; i < idx.size(); ++i)
                src[i] = keep[static_cast<std::size_t>(idx[i])];
            arr[flat++] = at(rel, src);
        } while (next_multi_index(idx, w.m_));
        w.arrays_[static_cast<std::size_t>(rel)] = std::move(arr);
    }
    return w;
}

namespace {

// All permutations sigma with |source_pi[sigma[i]] - target_pi[i]| <= tol,
// enumerated depth-first; results capped.
void matching_perms_rec(const std::vector<double>& target_pi, const std::vector<double>& source_pi,
                        double tol, std::vector<int>& current, std::vector<bool>& used,
                        std::vector<std::vector<int>>& out, std::size_t cap) {
    if (out.size() >= cap) return;
    const std::size_t pos = current.size();
    if (pos == target_pi.size()) {
        out.push_back(current);
        return;
    }
    for (std::size_t j = 0; j < source_pi.size(); ++j) {
        if (used[j]) continue;
        if (std::abs(source_pi[j] - target_pi[pos]) > tol) continue;
        used[j] = true;
        current.push_back(static_cast<int>(j));
        matching_perms_rec(target_pi, source_pi, tol, current, used, out, cap);
        current.pop_back();
        used[j] = false;
    }
}

std::vector<std::vector<int>> pi_matching_permutations(const std::vector<double>& target_pi,
                                                       const std::vector<double>& source_pi,
                                                       double tol, std::size_t cap = 100000) {
    std::vector<std::vector<int>> out;
    if (target_pi.size() != source_pi.size()) return out;
    std::vector<int> current;
    std::vector<bool> used(source_pi.size(), false);
    matching_perms_rec(target_pi, source_pi, tol, current, used, out, cap);
    return out;
}

} // namespace

StepFunction StepFunction::canonical_block_order() const {
    std::vector<int> order(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [this](int a, int b) {
        return pi_[static_cast<std::size_t>(a)] > pi_[static_cast<std::size_t>(b)];
    });
    StepFunction base = permute_blocks(order);

    // Resolve pi ties by the lexicographically smallest array contents.
    const auto perms = pi_matching_permutations(base.pi_, base.pi_, 1e-12, 10000);
    if (perms.size() <= 1) return base;
    StepFunction best = base;
    for (const auto& perm : perms) {
        StepFunction cand = base.permute_blocks(perm);
        if (cand.arrays_ < best.arrays_) best = std::move(cand);
    }
    return best;
}

bool StepFunction::same_partition(const StepFunction& other, double tol) const {
    if (m_ != other.m_) return false;
    for (int i = 0; i < m_; ++i)
        if (std::abs(pi_[static_cast<std::size_t>(i)] - other.pi_[static_cast<std::size_t>(i)]) > tol)
            return false;
    return true;
}

std::pair<StepFunction, StepFunction> common_refinement(const StepFunction& w,
                                                        const StepFunction& v) {
    if (w.signature() != v.signature())
        raise(ErrorCode::ValidationError, "signatures differ");

    std::vector<double> bounds;
    double c = 0.0;
    for (int i = 0; i < w.block_count(); ++i) {
        c += w.pi()[static_cast<std::size_t>(i)];
        bounds.push_back(c);
    }
    c = 0.0;
    for (int i = 0; i < v.block_count(); ++i) {
        c += v.pi()[static_cast<std::size_t>(i)];
        bounds.push_back(c);
    }
    bounds.push_back(1.0);
    std::sort(bounds.begin(), bounds.end());

    std::vector<double> cuts;
    for (double b : bounds) {
        if (b <= 1e-15 || b > 1.0 + 1e-12) continue;
        if (!cuts.empty() && b - cuts.back() <= 1e-13) continue;
        cuts.push_back(std::min(b, 1.0));
    }
    if (cuts.empty() || cuts.back() < 1.0) cuts.push_back(1.0);

    const int m1 = static_cast<int>(cuts.size());
    std::vector<double> pi(static_cast<std::size_t>(m1));
    std::vector<int> map_w(static_cast<std::size_t>(m1));
    std::vector<int> map_v(static_cast<std::size_t>(m1));
    double lo = 0.0;
    for (int i = 0; i < m1; ++i) {
        const double hi = cuts[static_cast<std::size_t>(i)];
        pi[static_cast<std::size_t>(i)] = hi - lo;
        const double mid = 0.5 * (lo + hi);
        map_w[static_cast<std::size_t>(i)] = w.cell_of(mid);
        map_v[static_cast<std::size_t>(i)] = v.cell_of(mid);
        lo = hi;
    }
    // Guard against accumulated rounding in the last cell.
    double sum = 0.0;
    for (double p : pi) sum += p;
    pi[static_cast<std::size_t>(m1 - 1)] += 1.0 - sum;

    auto build = [&](const StepFunction& src, const std::vector<int>& map_blocks) {
        std::vector<std::vector<double>> arrays;
        const Signature& sig = src.signature();
        for (int k = 0; k < sig.relation_count(); ++k) {
            const int d = sig.arity(k);
            std::vector<double> arr(pow_size(m1, d));
            std::vector<int> idx(static_cast<std::size_t>(d), 0);
            std::vector<int> sidx(static_cast<std::size_t>(d), 0);
            std::size_t flat = 0;
            do {
                for (std::size_t i = 0; i < idx.size(); ++i)
                    sidx[i] = map_blocks[static_cast<std::size_t>(idx[i])];
                arr[flat++] = src.at(k, sidx);
            } while (next_multi_index(idx, m1));
            arrays.push_back(std::move(arr));
        }
        return StepFunction::make(sig, pi, std::move(arrays), src.mode());
    };
    return {build(w, map_w), build(v, map_v)};
}

double l1_distance(const StepFunction& w, const StepFunction& v) {
    auto [a, b] = common_refinement(w, v);
    const Signature& sig = a.signature();
    const int m = a.block_count();
    double total = 0.0;
    for (int k = 0; k < sig.relation_count(); ++k) {
        const int d = sig.arity(k);
        std::vector<int> idx(static_cast<std::size_t>(d), 0);
        do {
            total += std::abs(a.at(k, idx) - b.at(k, idx)) * pi_product(a.pi(), idx);
        } while (next_multi_index(idx, m));
    }
    return total;
}

std::vector<double> l1_norms(const StepFunction& w) {
    const Signature& sig = w.signature();
    std::vector<double> out;
    for (int k = 0; k < sig.relation_count(); ++k) {
        const int d = sig.arity(k);
        std::vector<int> idx(static_cast<std::size_t>(d), 0);
        double total = 0.0;
        do {
            total += std::abs(w.at(k, idx)) * pi_product(w.pi(), idx);
        } while (next_multi_index(idx, w.block_count()));
        out.push_back(total);
    }
    return out;
}

namespace {

// Weighted box sum: sum over idx in S_1 x .. x S_d of A[idx] * prod(pi).
double box_sum(const StepFunction& w, int k, const std::vector<std::uint32_t>& masks) {
    const int d = w.signature().arity(k);
    const int m = w.block_count();
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    double total = 0.0;
    do {
        bool in = true;
        for (int i = 0; i < d && in; ++i)
            in = (masks[static_cast<std::size_t>(i)] >> idx[static_cast<std::size_t>(i)]) & 1u;
        if (in) total += w.at(k, idx) * pi_product(w.pi(), idx);
    } while (next_multi_index(idx, m));
    return total;
}

std::vector<int> mask_to_set(std::uint32_t mask, int m) {
    std::vector<int> out;
    for (int i = 0; i < m; ++i)
        if ((mask >> i) & 1u) out.push_back(i);
    return out;
}

CutNormResult cut_norm_exact_relation(const StepFunction& w, int k, int max_blocks) {
    const int d = w.signature().arity(k);
    const int m = w.block_count();
    if (m > max_blocks)
        raise(ErrorCode::ExactBoundExceeded,
              std::to_string(m) + " blocks exceeds exact bound " + std::to_string(max_blocks));
    if (d >= 2 && (d - 1) * m > 22)
        raise(ErrorCode::ExactBoundExceeded, "exact subset enumeration too large");

    CutNormResult best;
    best.axis_subsets.assign(static_cast<std::size_t>(d), {});

    if (d == 1) {
        double pos = 0.0, neg = 0.0;
        std::vector<int> pos_set, neg_set;
        for (int i = 0; i < m; ++i) {
            const double s = w.at(k, {i}) * w.pi()[static_cast<std::size_t>(i)];
            if (s > 0) { pos += s; pos_set.push_back(i); }
            else if (s < 0) { neg += -s; neg_set.push_back(i); }
        }
        best.value = std::max(pos, neg);
        best.axis_subsets[0] = pos >= neg ? pos_set : neg_set;
        return best;
    }

    // Enumerate subsets of the first d-1 axes; the last axis optimum given
    // the rest is the positive-part or negative-part selection.
    std::vector<std::uint32_t> masks(static_cast<std::size_t>(d - 1), 0);
    const std::uint32_t limit = static_cast<std::uint32_t>(1u << m);
    std::vector<double> s(static_cast<std::size_t>(m));
    std::vector<int> idx(static_cast<std::size_t>(d - 1), 0);
    while (true) {
        std::fill(s.begin(), s.end(), 0.0);
        std::fill(idx.begin(), idx.end(), 0);
        do {
            bool in = true;
            for (int i = 0; i < d - 1 && in; ++i)
                in = (masks[static_cast<std::size_t>(i)] >> idx[static_cast<std::size_t>(i)]) & 1u;
            if (in) {
                const double wprefix = pi_product(w.pi(), idx);
                std::vector<int> full(idx);
                full.push_back(0);
                for (int j = 0; j < m; ++j) {
                    full[static_cast<std::size_t>(d - 1)] = j;
                    s[static_cast<std::size_t>(j)] +=
                        w.at(k, full) * wprefix * w.pi()[static_cast<std::size_t>(j)];
                }
            }
        } while (next_multi_index(idx, m));

        double pos = 0.0, neg = 0.0;
        for (int j = 0; j < m; ++j) {
            if (s[static_cast<std::size_t>(j)] > 0) pos += s[static_cast<std::size_t>(j)];
            else neg += -s[static_cast<std::size_t>(j)];
        }
        const double value = std::max(pos, neg);
        if (value > best.value) {
            best.value = value;
            for (int i = 0; i < d - 1; ++i)
                best.axis_subsets[static_cast<std::size_t>(i)] =
                    mask_to_set(masks[static_cast<std::size_t>(i)], m);
            std::vector<int> last;
            for (int j = 0; j < m; ++j) {
                const double sj = s[static_cast<std::size_t>(j)];
                if ((pos >= neg && sj > 0) || (pos < neg && sj < 0)) last.push_back(j);
            }
            best.axis_subsets[static_cast<std::size_t>(d - 1)] = std::move(last);
        }

        int pos_axis = 0;
        while (pos_axis < d - 1 && ++masks[static_cast<std::size_t>(pos_axis)] == limit) {
            masks[static_cast<std::size_t>(pos_axis)] = 0;
            ++pos_axis;
        }
        if (pos_axis == d - 1) break;
    }
    return best;
}

CutNormResult cut_norm_heuristic_relation(const StepFunction& w, int k, int restarts,
                                          std::uint64_t seed) {
    const int d = w.signature().arity(k);
    const int m = w.block_count();
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(k) * 0x9e3779b97f4a7c15ull);

    CutNormResult best;
    best.axis_subsets.assign(static_cast<std::size_t>(d), {});

    std::vector<double> contrib(static_cast<std::size_t>(m));
    for (int sign = +1; sign >= -1; sign -= 2) {
        for (int restart = 0; restart < restarts; ++restart) {
            std::vector<std::uint32_t> masks(static_cast<std::size_t>(d));
            const std::uint32_t full = static_cast<std::uint32_t>((1u << m) - 1u);
            for (auto& mask : masks) {
                if (restart == 0) mask = full;
                else mask = static_cast<std::uint32_t>(rng()) & full;
            }
            bool changed = true;
            for (int sweep = 0; sweep < 200 && changed; ++sweep) {
                changed = false;
                for (int axis = 0; axis < d; ++axis) {
                    // contribution of each block of `axis`, all other axes
                    // restricted to their current subsets
                    std::fill(contrib.begin(), contrib.end(), 0.0);
                    std::vector<int> idx(static_cast<std::size_t>(d), 0);
                    do {
                        bool in = true;
                        for (int i = 0; i < d && in; ++i)
                            if (i != axis)
                                in = (masks[static_cast<std::size_t>(i)] >>
                                      idx[static_cast<std::size_t>(i)]) & 1u;
                        if (in)
                            contrib[static_cast<std::size_t>(idx[static_cast<std::size_t>(axis)])] +=
                                w.at(k, idx) * pi_product(w.pi(), idx);
                    } while (next_multi_index(idx, m));
                    std::uint32_t mask = 0;
                    for (int i = 0; i < m; ++i)
                        if (sign * contrib[static_cast<std::size_t>(i)] > 0)
                            mask |= (1u << i);
                    if (mask != masks[static_cast<std::size_t>(axis)]) {
                        masks[static_cast<std::size_t>(axis)] = mask;
                        changed = true;
                    }
                }
            }
            const double value = sign * box_sum(w, k, masks);
            if (value > best.value) {
                best.value = value;
                for (int i = 0; i < d; ++i)
                    best.axis_subsets[static_cast<std::size_t>(i)] =
                        mask_to_set(masks[static_cast<std::size_t>(i)], m);
            }
        }
    }
    return best;
}

} // namespace

std::vector<CutNormResult> cut_norm(const StepFunction& w, const CutNormOptions& opts) {
    if (w.block_count() > 31)
        raise(ErrorCode::ExactBoundExceeded, "cut norm limited to 31 blocks");
    std::vector<CutNormResult> out;
    for (int k = 0; k < w.signature().relation_count(); ++k) {
        out.push_back(opts.exact ? cut_norm_exact_relation(w, k, opts.max_exact_blocks)
                                 : cut_norm_heuristic_relation(w, k, opts.restarts, opts.seed));
    }
    return out;
}

double cut_norm_total(const StepFunction& w, const CutNormOptions& opts) {
    double total = 0.0;
    for (const auto& r : cut_norm(w, opts)) total += r.value;
    return total;
}

namespace {

StepFunction difference(const StepFunction& w, const StepFunction& v) {
    const Signature& sig = w.signature();
    std::vector<std::vector<double>> arrays;
    for (int k = 0; k < sig.relation_count(); ++k) {
        std::vector<double> arr(w.array(k).size());
        for (std::size_t i = 0; i < arr.size(); ++i)
            arr[i] = w.array(k)[i] - v.array(k)[i];
        arrays.push_back(std::move(arr));
    }
    return StepFunction::make(sig, w.pi(), std::move(arrays), Mode::RealValued);
}

} // namespace

CutDistanceResult cut_distance_aligned_detail(const StepFunction& w, const StepFunction& v,
                                              const CutNormOptions& opts) {
    if (w.signature() != v.signature())
        raise(ErrorCode::ValidationError, "signatures differ");
    if (w.block_count() != v.block_count())
        raise(ErrorCode::PartitionsNotPermutable, "block counts differ; refine first");
    if (opts.exact && w.block_count() > 8)
        raise(ErrorCode::ExactBoundExceeded, "aligned cut distance limited to 8 blocks");
    const auto perms = pi_matching_permutations(w.pi(), v.pi(), 1e-9);
    if (perms.empty())
        raise(ErrorCode::PartitionsNotPermutable, "partition weights are not a permutation match");
    CutDistanceResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (const auto& perm : perms) {
        const auto cuts = cut_norm(difference(w, v.permute_blocks(perm)), opts);
        double total = 0.0;
        for (const auto& c : cuts) total += c.value;
        if (total < best.value) {
            best.value = total;
            best.permutation = perm;
            best.per_relation = cuts;
        }
    }
    return best;
}

double cut_distance_aligned(const StepFunction& w, const StepFunction& v,
                            const CutNormOptions& opts) {
    return cut_distance_aligned_detail(w, v, opts).value;
}

double l1_distance_aligned(const StepFunction& w, const StepFunction& v) {
    if (w.block_count() == v.block_count()) {
        const auto perms = pi_matching_permutations(w.pi(), v.pi(), 1e-4, 50000);
        if (!perms.empty()) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& perm : perms)
                best = std::min(best, l1_distance(w, v.permute_blocks(perm)));
            return best;
        }
    }
    return l1_distance(w, v);
}

} // namespace hypermax
