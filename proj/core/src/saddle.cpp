#include "kvdg/saddle.hpp"

#include <cassert>
#include <cmath>
#include <numeric>

#include "kvdg/errors.hpp"

namespace kvdg {

BlockSaddleSystem::BlockSaddleSystem(const CsrMatrix& K, const CsrMatrix& B,
                                     std::vector<double> m, int dpe_v, int dpe_p)
    : nv_(K.rows()), np_(B.rows()), B_(B), m_(std::move(m)) {
    if (K.rows() != K.cols() || B.cols() != K.rows() || (long)m_.size() != np_)
        throw ConfigError("saddle: inconsistent block dimensions");
    domain_measure_ = std::accumulate(m_.begin(), m_.end(), 0.0);

    const int n = static_cast<int>(size());
    perm_.resize(n);
    if (dpe_v > 0 && dpe_p > 0 && nv_ % dpe_v == 0 && np_ % dpe_p == 0 &&
        nv_ / dpe_v == np_ / dpe_p) {
        const long nelem = nv_ / dpe_v;
        const int blk = dpe_v + dpe_p;
        for (long e = 0; e < nelem; ++e) {
            for (int i = 0; i < dpe_v; ++i) perm_[e * dpe_v + i] = static_cast<int>(e * blk + i);
            for (int i = 0; i < dpe_p; ++i)
                perm_[nv_ + e * dpe_p + i] = static_cast<int>(e * blk + dpe_v + i);
        }
        perm_[n - 1] = n - 1;
    } else {
        std::iota(perm_.begin(), perm_.end(), 0);
    }

    const int pv = static_cast<int>(nv_);
    const int pm = static_cast<int>(nv_ + np_);
    std::vector<Triplet> trip;
    trip.reserve(K.nnz() + 2 * B.nnz() + 2 * np_ + n);

    for (int r = 0; r < K.rows(); ++r)
        for (long k = K.row_ptr()[r]; k < K.row_ptr()[r + 1]; ++k)
            trip.push_back({perm_[r], perm_[K.col_idx()[k]], K.values()[k]});
    for (int r = 0; r < B.rows(); ++r)
        for (long k = B.row_ptr()[r]; k < B.row_ptr()[r + 1]; ++k) {
            const int c = B.col_idx()[k];
            const double v = B.values()[k];
            trip.push_back({perm_[pv + r], perm_[c], v});  // B
            trip.push_back({perm_[c], perm_[pv + r], v});  // B^T
        }
    for (int q = 0; q < np_; ++q) {
        trip.push_back({perm_[pv + q], perm_[pm], m_[q]});
        trip.push_back({perm_[pm], perm_[pv + q], m_[q]});
    }
    // Explicit structural diagonal so ILU(0) has a pivot in every row.
    for (int i = 0; i < n; ++i) trip.push_back({i, i, 0.0});

    S_ = CsrMatrix::from_triplets(n, n, std::move(trip));

    kslot_.resize(K.nnz());
    long idx = 0;
    for (int r = 0; r < K.rows(); ++r)
        for (long k = K.row_ptr()[r]; k < K.row_ptr()[r + 1]; ++k, ++idx) {
            const double* p = S_.find(perm_[r], perm_[K.col_idx()[k]]);
            assert(p);
            kslot_[idx] = p - S_.values().data();
        }
    update_velocity_block(K);
}

void BlockSaddleSystem::update_velocity_block(const CsrMatrix& K) {
    if ((long)kslot_.size() != K.nnz())
        throw ConfigError("saddle: velocity block pattern changed");
    for (size_t i = 0; i < kslot_.size(); ++i) S_.values()[kslot_[i]] = K.values()[i];
    ilu_ready_ = false;
}

SaddleSolution BlockSaddleSystem::solve(std::span<const double> F, const GmresOptions& opt,
                                        std::vector<double>* warm) const {
    if ((long)F.size() != nv_) throw ConfigError("saddle: rhs size mismatch");
    const long n = size();
    std::vector<double> rhs(n, 0.0);
    for (long i = 0; i < nv_; ++i) rhs[perm_[i]] = F[i];

    std::vector<double> x(n, 0.0);
    if (warm && (long)warm->size() == n) x = *warm; // warm vector kept in internal ordering

    // Equilibrate and factor lazily after each velocity-block update.
    if (!ilu_ready_) {
        if (scale_.empty()) {
            scaled_ = S_;
            scale_.resize(n);
        } else {
            scaled_.values() = S_.values();
        }
        const auto& rp = S_.row_ptr();
        const auto& vals = S_.values();
        for (long i = 0; i < n; ++i) {
            double m = 0.0;
            for (long k = rp[i]; k < rp[i + 1]; ++k) m = std::max(m, std::fabs(vals[k]));
            scale_[i] = m > 0.0 ? 1.0 / std::sqrt(m) : 1.0;
        }
        auto& svals = scaled_.values();
        const auto& cols = scaled_.col_idx();
        for (long i = 0; i < n; ++i)
            for (long k = rp[i]; k < rp[i + 1]; ++k) svals[k] *= scale_[i] * scale_[cols[k]];
        ilu_ = Ilut::factor(scaled_);
        ilu_ready_ = true;
    }

    // Solve (D S D) y = D rhs with x = D y.
    std::vector<double> rhs_sc(n);
    for (long i = 0; i < n; ++i) rhs_sc[i] = scale_[i] * rhs[i];
    std::vector<double> y(n);
    for (long i = 0; i < n; ++i) y[i] = x[i] / scale_[i];
    GmresStats stats = gmres(scaled_, rhs_sc, y, opt, &ilu_);
    for (long i = 0; i < n; ++i) x[i] = scale_[i] * y[i];
    if (!stats.converged) {
        std::string msg = "saddle solve did not converge: residual " +
                          std::to_string(stats.residual) + " after " +
                          std::to_string(stats.iterations) + " iterations (rhs norm " +
                          std::to_string(stats.rhs_norm) + ")";
        if (!stats.history.empty()) {
            msg += "; residual history tail:";
            const size_t tail = std::min<size_t>(5, stats.history.size());
            for (size_t i = stats.history.size() - tail; i < stats.history.size(); ++i)
                msg += " " + std::to_string(stats.history[i]);
        }
        throw SolveError(msg);
    }
    if (warm) *warm = x;

    SaddleSolution sol;
    sol.stats = std::move(stats);
    sol.u.resize(nv_);
    sol.p.resize(np_);
    for (long i = 0; i < nv_; ++i) sol.u[i] = x[perm_[i]];
    for (long q = 0; q < np_; ++q) sol.p[q] = x[perm_[nv_ + q]];
    sol.multiplier = x[n - 1];

    // Representative of the L^2/R class with exactly zero mean.
    const double mean = dot(m_, sol.p) / domain_measure_;
    for (double& v : sol.p) v -= mean;

    std::vector<double> bu(np_);
    B_.multiply(sol.u, bu);
    sol.div_residual = norm2(bu);
    return sol;
}

} // namespace kvdg
