#include "oracle.hpp"

#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

namespace pmme::testing {

namespace {

std::vector<int> digits(Eigen::Index index, int d, int n) {
    std::vector<int> out(static_cast<std::size_t>(n));
    for (int p = n - 1; p >= 0; --p) {
        out[static_cast<std::size_t>(p)] = static_cast<int>(index % d);
        index /= d;
    }
    return out;
}

Eigen::Index index_of(const std::vector<int>& dig, int d) {
    Eigen::Index idx = 0;
    for (int x : dig) idx = idx * d + x;
    return idx;
}

Eigen::Index power(int d, int n) {
    Eigen::Index p = 1;
    for (int i = 0; i < n; ++i) p *= d;
    return p;
}

}  // namespace

Matrix embed_two_body(const Matrix& u, int d, int n, int a, int b) {
    if (a == b || u.rows() != d * d) throw std::invalid_argument("embed_two_body: bad arguments");
    const Eigen::Index dim = power(d, n);
    Matrix out = Matrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        auto dig = digits(col, d, n);
        const int in = dig[static_cast<std::size_t>(a)] * d + dig[static_cast<std::size_t>(b)];
        for (int x = 0; x < d; ++x) {
            for (int y = 0; y < d; ++y) {
                dig[static_cast<std::size_t>(a)] = x;
                dig[static_cast<std::size_t>(b)] = y;
                out(index_of(dig, d), col) += u(x * d + y, in);
            }
        }
    }
    return out;
}

Matrix embed_one_body(const Matrix& op, int d, int n, int a) {
    const Eigen::Index dim = power(d, n);
    Matrix out = Matrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        auto dig = digits(col, d, n);
        const int in = dig[static_cast<std::size_t>(a)];
        for (int x = 0; x < d; ++x) {
            dig[static_cast<std::size_t>(a)] = x;
            out(index_of(dig, d), col) += op(x, in);
        }
    }
    return out;
}

Matrix reduce_to_first(const Matrix& rho, int d, int n) {
    const Eigen::Index rest = power(d, n - 1);
    Matrix out = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (Eigen::Index k = 0; k < rest; ++k) out(i, j) += rho(i * rest + k, j * rest + k);
    return out;
}

Matrix brute_force_run(const Matrix& u, const Matrix& u_m, const std::vector<Vector>& basis, const Matrix& eta,
                       const Matrix& rho0, int measured, int n_collisions) {
    const int d = static_cast<int>(rho0.rows());
    const int n = n_collisions + 1;
    Matrix rho = rho0;
    for (int k = 0; k < n_collisions; ++k) rho = Eigen::kroneckerProduct(rho, eta).eval();
    for (int k = 1; k <= n_collisions; ++k) {
        const Matrix uk = embed_two_body(u, d, n, 0, k);
        rho = uk * rho * uk.adjoint();
        if (k == measured) {
            const Matrix um = embed_two_body(u_m, d, n, 0, k);
            rho = um * rho * um.adjoint();
            Matrix dephased = Matrix::Zero(rho.rows(), rho.cols());
            for (const auto& m : basis) {
                const Matrix p = embed_one_body(m * m.adjoint(), d, n, k);
                dephased += p * rho * p;
            }
            rho = dephased;
        }
    }
    return reduce_to_first(rho, d, n);
}

}  // namespace pmme::testing
