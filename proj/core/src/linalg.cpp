#include "kvdg/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "kvdg/errors.hpp"

namespace kvdg {

CsrMatrix CsrMatrix::from_triplets(int rows, int cols, std::vector<Triplet> t) {
    std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_ptr_.assign(rows + 1, 0);
    size_t i = 0;
    while (i < t.size()) {
        assert(t[i].row >= 0 && t[i].row < rows && t[i].col >= 0 && t[i].col < cols);
        double v = t[i].value;
        size_t j = i + 1;
        while (j < t.size() && t[j].row == t[i].row && t[j].col == t[i].col) {
            v += t[j].value;
            ++j;
        }
        m.col_idx_.push_back(t[i].col);
        m.values_.push_back(v);
        m.row_ptr_[t[i].row + 1]++;
        i = j;
    }
    for (int r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
}

double* CsrMatrix::find(int r, int c) {
    auto first = col_idx_.begin() + row_ptr_[r];
    auto last = col_idx_.begin() + row_ptr_[r + 1];
    auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return nullptr;
    return &values_[it - col_idx_.begin()];
}

const double* CsrMatrix::find(int r, int c) const {
    return const_cast<CsrMatrix*>(this)->find(r, c);
}

void CsrMatrix::add(int r, int c, double v) {
    double* p = find(r, c);
    if (!p) throw ConfigError("CsrMatrix::add: entry outside the pattern");
    *p += v;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    assert((int)x.size() == cols_ && (int)y.size() == rows_);
    for (int r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (long k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += values_[k] * x[col_idx_[k]];
        y[r] = s;
    }
}

void CsrMatrix::multiply_add(std::span<const double> x, std::span<double> y, double alpha) const {
    for (int r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (long k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += values_[k] * x[col_idx_[k]];
        y[r] += alpha * s;
    }
}

double CsrMatrix::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::fabs(v));
    return m;
}

void CsrMatrix::scale(double a) {
    for (double& v : values_) v *= a;
}

std::vector<std::vector<double>> CsrMatrix::to_dense() const {
    std::vector<std::vector<double>> d(rows_, std::vector<double>(cols_, 0.0));
    for (int r = 0; r < rows_; ++r)
        for (long k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) d[r][col_idx_[k]] += values_[k];
    return d;
}

std::vector<long> CsrMatrix::map_into(const CsrMatrix& target) const {
    std::vector<long> slots(nnz());
    long idx = 0;
    for (int r = 0; r < rows_; ++r)
        for (long k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k, ++idx) {
            const double* p = target.find(r, col_idx_[k]);
            if (!p) throw ConfigError("map_into: entry outside the target pattern");
            slots[idx] = p - target.values().data();
        }
    return slots;
}

void CsrMatrix::dump_coo(std::ostream& out) const {
    char buf[96];
    for (int r = 0; r < rows_; ++r)
        for (long k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%d %d %.17g\n", r, col_idx_[k], values_[k]);
            out << buf;
        }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
    for (size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

// ---------------------------------------------------------------------------
// ILU(0)

Ilu0 Ilu0::factor(const CsrMatrix& A) {
    if (A.rows() != A.cols()) throw ConfigError("ilu0: matrix must be square");
    Ilu0 f;
    f.n_ = A.rows();
    f.row_ptr_ = A.row_ptr();
    f.col_idx_ = A.col_idx();
    f.diag_.assign(f.n_, -1);
    for (int r = 0; r < f.n_; ++r) {
        for (long k = f.row_ptr_[r]; k < f.row_ptr_[r + 1]; ++k)
            if (f.col_idx_[k] == r) f.diag_[r] = k;
        if (f.diag_[r] < 0)
            throw ConfigError("ilu0: structurally singular row " + std::to_string(r) +
                              " (no diagonal entry in the pattern)");
    }
    f.numeric(A);
    return f;
}

void Ilu0::refactor(const CsrMatrix& A) {
    assert(A.rows() == n_ && A.col_idx() == col_idx_);
    numeric(A);
}

void Ilu0::numeric(const CsrMatrix& A) {
    lu_ = A.values();
    const double shift = 1e-12 * A.max_abs();
    // Standard IKJ factorization restricted to the pattern.
    for (int i = 0; i < n_; ++i) {
        for (long kk = row_ptr_[i]; kk < diag_[i]; ++kk) {
            const int k = col_idx_[kk];
            const double lik = lu_[kk] / lu_[diag_[k]];
            lu_[kk] = lik;
            // Subtract lik * U(k, j) for j > k present in row i.
            long pi = kk + 1;
            long pk = diag_[k] + 1;
            const long ei = row_ptr_[i + 1], ek = row_ptr_[k + 1];
            while (pi < ei && pk < ek) {
                if (col_idx_[pi] == col_idx_[pk]) {
                    lu_[pi] -= lik * lu_[pk];
                    ++pi;
                    ++pk;
                } else if (col_idx_[pi] < col_idx_[pk]) {
                    ++pi;
                } else {
                    ++pk;
                }
            }
        }
        double& piv = lu_[diag_[i]];
        if (std::fabs(piv) < shift) piv = (piv < 0.0 ? -1.0 : 1.0) * (shift > 0.0 ? shift : 1e-300);
    }
}

void Ilu0::apply(std::span<const double> r, std::span<double> z) const {
    assert((int)r.size() == n_ && (int)z.size() == n_);
    // Forward solve with unit-diagonal L.
    for (int i = 0; i < n_; ++i) {
        double s = r[i];
        for (long k = row_ptr_[i]; k < diag_[i]; ++k) s -= lu_[k] * z[col_idx_[k]];
        z[i] = s;
    }
    // Backward solve with U.
    for (int i = n_ - 1; i >= 0; --i) {
        double s = z[i];
        for (long k = diag_[i] + 1; k < row_ptr_[i + 1]; ++k) s -= lu_[k] * z[col_idx_[k]];
        z[i] = s / lu_[diag_[i]];
    }
}

// ---------------------------------------------------------------------------
// ILUT

Ilut Ilut::factor(const CsrMatrix& A, const Options& opt) {
    if (A.rows() != A.cols()) throw ConfigError("ilut: matrix must be square");
    const int n = A.rows();
    Ilut f;
    f.n_ = n;
    f.row_ptr_.assign(n + 1, 0);
    f.diag_.assign(n, -1);
    f.col_idx_.reserve(A.nnz() * 2);
    f.lu_.reserve(A.nnz() * 2);
    const double pivot_floor = 1e-12 * A.max_abs();

    std::vector<double> w(n, 0.0);   // dense work row
    std::vector<int> occupied(n, 0); // epoch markers
    std::vector<int> cols;           // nonzero columns of the work row
    int epoch = 0;

    for (int i = 0; i < n; ++i) {
        ++epoch;
        cols.clear();
        double row_norm = 0.0;
        for (long k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k) {
            const int c = A.col_idx()[k];
            w[c] = A.values()[k];
            occupied[c] = epoch;
            cols.push_back(c);
            row_norm += A.values()[k] * A.values()[k];
        }
        const long nnz_row = A.row_ptr()[i + 1] - A.row_ptr()[i];
        const double drop = opt.drop_tol * std::sqrt(row_norm / std::max<long>(1, nnz_row));

        // Eliminate with previously factored rows in ascending column order.
        std::sort(cols.begin(), cols.end());
        for (size_t ci = 0; ci < cols.size(); ++ci) {
            const int k = cols[ci];
            if (k >= i) break;
            if (occupied[k] != epoch) continue;
            double lik = w[k] / f.lu_[f.diag_[k]];
            if (std::fabs(lik) < drop) {
                w[k] = 0.0;
                occupied[k] = 0;
                continue;
            }
            w[k] = lik;
            for (long kk = f.diag_[k] + 1; kk < f.row_ptr_[k + 1]; ++kk) {
                const int j = f.col_idx_[kk];
                const double upd = lik * f.lu_[kk];
                if (occupied[j] == epoch) {
                    w[j] -= upd;
                } else if (std::fabs(upd) >= drop) {
                    w[j] = -upd;
                    occupied[j] = epoch;
                    cols.push_back(j);
                    // keep the ascending sweep valid for new columns < i
                    if (j < i) {
                        size_t pos = cols.size() - 1;
                        while (pos > ci + 1 && cols[pos - 1] > j) {
                            std::swap(cols[pos - 1], cols[pos]);
                            --pos;
                        }
                    }
                }
            }
        }

        // Split into L and U parts, keep the largest entries of each.
        std::vector<std::pair<double, int>> lpart, upart;
        double diag_val = 0.0;
        for (int c : cols) {
            if (occupied[c] != epoch) continue;
            const double v = w[c];
            occupied[c] = 0;
            if (c == i) {
                diag_val = v;
            } else if (std::fabs(v) >= drop) {
                (c < i ? lpart : upart).push_back({v, c});
            }
        }
        auto keep_largest = [&](std::vector<std::pair<double, int>>& part) {
            if ((int)part.size() > opt.max_fill) {
                std::nth_element(part.begin(), part.begin() + opt.max_fill, part.end(),
                                 [](const auto& a, const auto& b) {
                                     return std::fabs(a.first) > std::fabs(b.first);
                                 });
                part.resize(opt.max_fill);
            }
            std::sort(part.begin(), part.end(),
                      [](const auto& a, const auto& b) { return a.second < b.second; });
        };
        keep_largest(lpart);
        keep_largest(upart);

        if (std::fabs(diag_val) < pivot_floor)
            diag_val = (diag_val < 0.0 ? -1.0 : 1.0) * (pivot_floor > 0.0 ? pivot_floor : 1e-300);

        for (const auto& [v, c] : lpart) {
            f.col_idx_.push_back(c);
            f.lu_.push_back(v);
        }
        f.diag_[i] = static_cast<long>(f.col_idx_.size());
        f.col_idx_.push_back(i);
        f.lu_.push_back(diag_val);
        for (const auto& [v, c] : upart) {
            f.col_idx_.push_back(c);
            f.lu_.push_back(v);
        }
        f.row_ptr_[i + 1] = static_cast<long>(f.col_idx_.size());
    }
    return f;
}

void Ilut::apply(std::span<const double> r, std::span<double> z) const {
    assert((int)r.size() == n_ && (int)z.size() == n_);
    for (int i = 0; i < n_; ++i) {
        double s = r[i];
        for (long k = row_ptr_[i]; k < diag_[i]; ++k) s -= lu_[k] * z[col_idx_[k]];
        z[i] = s;
    }
    for (int i = n_ - 1; i >= 0; --i) {
        double s = z[i];
        for (long k = diag_[i] + 1; k < row_ptr_[i + 1]; ++k) s -= lu_[k] * z[col_idx_[k]];
        z[i] = s / lu_[diag_[i]];
    }
}

// ---------------------------------------------------------------------------
// GMRES

GmresStats gmres(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
                 const GmresOptions& opt, const Preconditioner* precond) {
    const int n = A.rows();
    if (A.cols() != n || (int)b.size() != n || (int)x.size() != n)
        throw ConfigError("gmres: dimension mismatch");

    GmresStats st;
    st.rhs_norm = norm2(b);
    const double target = opt.tol * (st.rhs_norm > 0.0 ? st.rhs_norm : 1.0);

    std::vector<double> r(n), w(n), z(n);
    A.multiply(x, r);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double beta = norm2(r);
    st.residual = beta;
    if (beta <= target) {
        st.converged = true;
        return st;
    }

    const int m = std::max(1, opt.restart);
    std::vector<std::vector<double>> V(m + 1, std::vector<double>(n));
    std::vector<double> H((m + 1) * m, 0.0);
    std::vector<double> cs(m), sn(m), g(m + 1);
    auto h = [&H, m](int i, int j) -> double& { return H[i * m + j]; };

    while (st.iterations < opt.max_iters) {
        // Arnoldi with modified Gram-Schmidt and Givens rotations.
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;
        for (int i = 0; i < n; ++i) V[0][i] = r[i] / beta;

        int k = 0;
        bool breakdown = false;
        for (; k < m && st.iterations < opt.max_iters; ++k) {
            ++st.iterations;
            if (precond) {
                precond->apply(V[k], z);
                A.multiply(z, w);
            } else {
                A.multiply(V[k], w);
            }
            for (int i = 0; i <= k; ++i) {
                const double hik = dot(w, V[i]);
                h(i, k) = hik;
                axpy(-hik, V[i], w);
            }
            const double hkk = norm2(w);
            h(k + 1, k) = hkk;
            if (hkk > 1e-300)
                for (int i = 0; i < n; ++i) V[k + 1][i] = w[i] / hkk;
            else
                breakdown = true; // happy breakdown: exact solution in the subspace

            for (int i = 0; i < k; ++i) {
                const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
                h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
                h(i, k) = t;
            }
            const double denom = std::hypot(h(k, k), h(k + 1, k));
            cs[k] = h(k, k) / denom;
            sn[k] = h(k + 1, k) / denom;
            h(k, k) = denom;
            h(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];

            const double res_est = std::fabs(g[k + 1]);
            st.history.push_back(res_est);
            if (res_est <= target || breakdown) {
                ++k;
                break;
            }
        }

        // y = H^{-1} g by back substitution, then x += (M^{-1}) V y.
        std::vector<double> y(k, 0.0);
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int j = i + 1; j < k; ++j) s -= h(i, j) * y[j];
            y[i] = s / h(i, i);
        }
        std::fill(w.begin(), w.end(), 0.0);
        for (int j = 0; j < k; ++j) axpy(y[j], V[j], w);
        if (precond) {
            precond->apply(w, z);
            axpy(1.0, z, x);
        } else {
            axpy(1.0, w, x);
        }

        A.multiply(x, r);
        for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
        beta = norm2(r);
        st.residual = beta;
        if (beta <= target) {
            st.converged = true;
            return st;
        }
        if (breakdown) break; // subspace exhausted; nothing more to gain
    }
    return st;
}

} // namespace kvdg
