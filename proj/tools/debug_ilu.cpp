// Scratch: ILU(0) sanity. On a tridiagonal matrix ILU(0) equals the exact
// LU factorization, so one preconditioned iteration must solve the system.
#include <cstdio>
#include <random>
#include <vector>

#include "kvdg/forms.hpp"
#include "kvdg/linalg.hpp"
#include "kvdg/mesh.hpp"

using namespace kvdg;

int main() {
    {
        const int n = 10;
        std::vector<Triplet> t;
        for (int i = 0; i < n; ++i) {
            t.push_back({i, i, 4.0});
            if (i > 0) t.push_back({i, i - 1, -1.0});
            if (i + 1 < n) t.push_back({i, i + 1, -1.0});
        }
        const CsrMatrix A = CsrMatrix::from_triplets(n, n, t);
        std::vector<double> b(n, 1.0), x0(n, 0.0), x1(n, 0.0);
        const GmresStats s0 = gmres(A, b, x0, {1e-12, 50, 500});
        const Ilu0 ilu = Ilu0::factor(A);
        const GmresStats s1 = gmres(A, b, x1, {1e-12, 50, 500}, &ilu);
        std::printf("tridiag: unprec %d its (res %.1e), ilu %d its (res %.1e)\n", s0.iterations,
                    s0.residual, s1.iterations, s1.residual);
    }
    {
        // SIPG Poisson n=8: compare unpreconditioned vs ILU(0).
        const TriMesh mesh = TriMesh::structured(8);
        const BrokenSpace s(mesh, 1, 1);
        const CsrMatrix A = assemble_sipg(s, {1.0, 0.0, 10.0, -1});
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<double> b(A.rows());
        for (double& v : b) v = dist(rng);
        std::vector<double> x0(A.rows(), 0.0), x1(A.rows(), 0.0);
        const GmresStats s0 = gmres(A, b, x0, {1e-10, 400, 4000});
        const Ilu0 ilu = Ilu0::factor(A);
        const GmresStats s1 = gmres(A, b, x1, {1e-10, 400, 4000}, &ilu);
        std::printf("poisson8: unprec %d its (res %.1e), ilu %d its (res %.1e)\n", s0.iterations,
                    s0.residual, s1.iterations, s1.residual);
    }
    return 0;
}
