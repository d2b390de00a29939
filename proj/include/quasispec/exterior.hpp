#pragma once

// Exterior powers of C^n for n <= 5. A wedge v_1 ^ ... ^ v_m is stored in the basis
// e_I, I an increasing m-subset of {0..n-1}; its I-component is the minor of the
// column matrix [v_1 ... v_m] on rows I. Propagating wedges directly through the
// induced (compound) system avoids the cancellation that forming minors of a
// propagated fundamental matrix suffers when lambda is large.

#include "quasispec/core.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <utility>
#include <vector>

namespace quasispec {

using Subset = std::vector<int>;

/// Sign of the permutation sorting `seq`; 0 if it has repeated entries.
inline int permutation_sign(std::vector<int> seq) {
    int sign = 1;
    for (std::size_t i = 0; i < seq.size(); ++i)
        for (std::size_t j = i + 1; j < seq.size(); ++j) {
            if (seq[i] == seq[j])
                return 0;
            if (seq[i] > seq[j])
                sign = -sign;
        }
    return sign;
}

class ExteriorBasis {
public:
    ExteriorBasis(int n, int m) : n_(n), m_(m) {
        Subset cur;
        build(0, cur);
        for (int idx = 0; idx < dim(); ++idx)
            index_[subsets_[idx]] = idx;
        // derivation terms: e_J -> sum_t e_{j1} ^ .. (A e_{jt}) .. ^ e_{jm}
        for (int J = 0; J < dim(); ++J) {
            const auto& js = subsets_[J];
            for (int t = 0; t < m_; ++t)
                for (int i = 0; i < n_; ++i) {
                    std::vector<int> seq(js.begin(), js.end());
                    seq[t] = i;
                    int s = permutation_sign(seq);
                    if (s == 0)
                        continue;
                    std::sort(seq.begin(), seq.end());
                    terms_.push_back({index_.at(seq), J, i, js[t], s});
                }
        }
    }

    int n() const { return n_; }
    int m() const { return m_; }
    int dim() const { return static_cast<int>(subsets_.size()); }
    const Subset& subset(int idx) const { return subsets_[idx]; }
    int index(const Subset& s) const { return index_.at(s); }

    /// The matrix of the derivation induced by A on the m-th exterior power.
    void compound(const Matrix& A, Matrix& out) const {
        out.setZero(dim(), dim());
        for (const auto& t : terms_)
            out(t.I, t.J) += static_cast<double>(t.sign) * A(t.i, t.j);
    }

    /// Coordinates of e_{a_1} ^ ... ^ e_{a_m} (indices in the given order).
    Vector basis_wedge(const std::vector<int>& a) const {
        Vector w = Vector::Zero(dim());
        int s = permutation_sign(a);
        if (s == 0)
            return w;
        std::vector<int> sorted(a);
        std::sort(sorted.begin(), sorted.end());
        w(index(sorted)) = static_cast<double>(s);
        return w;
    }

    /// Process-wide cached bases.
    static const ExteriorBasis& get(int n, int m) {
        static const auto table = [] {
            std::map<std::pair<int, int>, ExteriorBasis> t;
            for (int nn = 1; nn <= max_order; ++nn)
                for (int mm = 1; mm <= nn; ++mm)
                    t.emplace(std::make_pair(nn, mm), ExteriorBasis(nn, mm));
            return t;
        }();
        return table.at({n, m});
    }

private:
    struct Term {
        int I, J, i, j, sign;
    };

    void build(int start, Subset& cur) {
        if (static_cast<int>(cur.size()) == m_) {
            subsets_.push_back(cur);
            return;
        }
        for (int i = start; i < n_; ++i) {
            cur.push_back(i);
            build(i + 1, cur);
            cur.pop_back();
        }
    }

    int n_, m_;
    std::vector<Subset> subsets_;
    std::map<Subset, int> index_;
    std::vector<Term> terms_;
};

} // namespace quasispec
