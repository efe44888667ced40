#ifndef KVDG_LINALG_HPP
#define KVDG_LINALG_HPP

#include <iosfwd>
#include <span>
#include <vector>

namespace kvdg {

struct Triplet {
    int row;
    int col;
    double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row; duplicates are summed when building from triplets.
class CsrMatrix {
public:
    CsrMatrix() = default;

    static CsrMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    long nnz() const { return static_cast<long>(col_idx_.size()); }

    const std::vector<long>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    /// Pointer to the stored entry (r,c), or nullptr if outside the pattern.
    double* find(int r, int c);
    const double* find(int r, int c) const;
    /// Adds v to the stored entry (r,c); the entry must exist.
    void add(int r, int c, double v);

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;
    /// y += alpha * A x
    void multiply_add(std::span<const double> x, std::span<double> y, double alpha = 1.0) const;

    double max_abs() const;
    void scale(double a);
    std::vector<std::vector<double>> to_dense() const;

    /// For each stored entry of *this, the value-array slot of the same
    /// (row, col) position in target. Throws if an entry is missing there.
    std::vector<long> map_into(const CsrMatrix& target) const;

    /// Coordinate-format text dump: one "row col value" triplet per line.
    void dump_coo(std::ostream& out) const;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<long> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Vector helpers

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
void axpy(double a, std::span<const double> x, std::span<double> y); // y += a*x

// ---------------------------------------------------------------------------
// Preconditioners

/// Left-applied operator approximating A^{-1}.
class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    virtual void apply(std::span<const double> r, std::span<double> z) const = 0;
};

/// Incomplete LU factorization on the sparsity pattern of A. The pattern
/// must contain every diagonal entry (explicit zeros are fine); vanishing
/// pivots are shifted by 1e-12 * max|A|.
class Ilu0 : public Preconditioner {
public:
    static Ilu0 factor(const CsrMatrix& A);
    /// Re-factor a matrix with the identical pattern (cheap symbolic reuse).
    void refactor(const CsrMatrix& A);
    /// z = U^{-1} L^{-1} r
    void apply(std::span<const double> r, std::span<double> z) const override;
    bool ready() const { return n_ > 0; }

private:
    void numeric(const CsrMatrix& A);
    int n_ = 0;
    std::vector<long> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<long> diag_;    // position of the diagonal in each row
    std::vector<double> lu_;
};

/// Dual-threshold incomplete LU (drop tolerance + bounded fill per row).
/// Stronger than ILU(0) on stiffness-dominated saddle systems; used as the
/// production preconditioner of the per-step solves.
class Ilut : public Preconditioner {
public:
    struct Options {
        double drop_tol = 1e-3; // relative to the 2-norm of each row
        int max_fill = 50;      // kept entries per row and triangular part
    };
    static Ilut factor(const CsrMatrix& A, const Options& opt = {});
    void apply(std::span<const double> r, std::span<double> z) const override;
    bool ready() const { return n_ > 0; }
    long nnz() const { return static_cast<long>(col_idx_.size()); }

private:
    int n_ = 0;
    std::vector<long> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<long> diag_;
    std::vector<double> lu_;
};

// ---------------------------------------------------------------------------
// Restarted GMRES

struct GmresOptions {
    double tol = 1e-10;  // relative: ||b - Ax|| <= tol * ||b||
    int restart = 200;
    int max_iters = 2000;
};

struct GmresStats {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;              // final true residual norm
    double rhs_norm = 0.0;
    std::vector<double> history;        // residual estimate per iteration
};

/// Right-preconditioned restarted GMRES. x holds the initial guess on entry
/// and the best iterate on exit; the reported residual is the true residual
/// of the returned iterate. Non-convergence is reported through the stats,
/// never silently.
GmresStats gmres(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
                 const GmresOptions& opt, const Preconditioner* precond = nullptr);

} // namespace kvdg

#endif
