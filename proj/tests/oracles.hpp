#pragma once

// Test-only oracles, deliberately independent of the library's solve paths:
// naive summation loops, finite differences, a dense Kronecker system and a
// plain gradient-descent minimizer of the joint objective.

#include "eio/datagen.hpp"
#include "eio/types.hpp"

#include <Eigen/Dense>

#include <functional>

namespace eio::oracle {

inline Matrix random_matrix(RngStream& rng, Index rows, Index cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            m(i, j) = scale * rng.uniform_sym();
        }
    }
    return m;
}

inline Vector random_vector(RngStream& rng, Index size, double scale = 1.0) {
    Vector v(size);
    for (Index i = 0; i < size; ++i) {
        v(i) = scale * rng.uniform_sym();
    }
    return v;
}

inline Matrix random_spd(RngStream& rng, Index d, double ridge = 0.1) {
    const Matrix m = random_matrix(rng, d, d);
    return Matrix(m * m.transpose() / static_cast<double>(d)) +
           ridge * Matrix::Identity(d, d);
}

// Objective evaluated entry by entry, no linear algebra kernels.
inline double objective_naive(const Vector& z, const Matrix& s, double mu, double lambda,
                              const Vector& theta, const Vector& eta, const Matrix& a) {
    const Index d = z.size();
    double fit = 0.0, link = 0.0, op_pen = 0.0, theta_pen = 0.0;
    for (Index i = 0; i < d; ++i) {
        const double r1 = z(i) - eta(i);
        fit += 0.5 * r1 * r1;
        double a_theta = 0.0;
        for (Index j = 0; j < d; ++j) {
            a_theta += a(i, j) * theta(j);
        }
        const double r2 = eta(i) - a_theta;
        link += 0.5 * r2 * r2;
        for (Index j = 0; j < d; ++j) {
            const double r3 = s(i, j) - a(i, j);
            op_pen += 0.5 * mu * mu * r3 * r3;
        }
        theta_pen += 0.5 * lambda * theta(i) * theta(i);
    }
    return fit + link + op_pen + theta_pen;
}

// Central differences are exact for quadratics up to rounding, so h can stay
// large enough to keep the rounding noise far below the tolerances in play.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h = 1e-4) {
    Vector g(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        Vector hi = x, lo = x;
        hi(i) += h;
        lo(i) -= h;
        g(i) = (f(hi) - f(lo)) / (2.0 * h);
    }
    return g;
}

// Stationarity system of the operator block, solved as a dense d^2 x d^2
// linear system on vec(A): ((mu^2 I + theta theta^T/2)^T kron I) vec(A)
// = vec(mu^2 s + z theta^T / 2).
inline Matrix a_update_kron_oracle(const Matrix& s, const Vector& z, const Vector& theta,
                                   double mu) {
    const Index d = z.size();
    const Matrix right = mu * mu * Matrix::Identity(d, d) + 0.5 * theta * theta.transpose();
    const Matrix rhs_mat = mu * mu * s + 0.5 * z * theta.transpose();

    Matrix system = Matrix::Zero(d * d, d * d);
    Vector rhs(d * d);
    // Column-major vec: entry (i, j) of A sits at j*d + i.
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            const Index row = j * d + i;
            rhs(row) = rhs_mat(i, j);
            for (Index k = 0; k < d; ++k) {
                system(row, k * d + i) += right(k, j);
            }
        }
    }
    const Vector solution = system.fullPivLu().solve(rhs);
    Matrix a(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            a(i, j) = solution(j * d + i);
        }
    }
    return a;
}

struct GdResult {
    Vector theta;
    Vector eta;
    Matrix a;
    double objective = 0.0;
    long steps = 0;
};

// Plain gradient descent on L over (theta, eta, A) from the localization
// start (0, z, s), with step halving on any increase. Slow and simple.
inline GdResult gradient_descent_oracle(const Vector& z, const Matrix& s, double mu,
                                        double lambda, long max_steps = 2'000'000,
                                        double grad_tol = 1e-11) {
    const Index d = z.size();
    Vector theta = Vector::Zero(d);
    Vector eta = z;
    Matrix a = s;

    const double lipschitz_est =
        2.0 * mu * mu + 2.0 * s.squaredNorm() + 2.0 * z.squaredNorm() + lambda + 4.0;
    double step = 1.0 / lipschitz_est;
    const double step_cap = step;

    auto value = [&](const Vector& th, const Vector& et, const Matrix& aa) {
        return 0.5 * (z - et).squaredNorm() + 0.5 * (et - aa * th).squaredNorm() +
               0.5 * mu * mu * (s - aa).squaredNorm() + 0.5 * lambda * th.squaredNorm();
    };

    double current = value(theta, eta, a);
    GdResult result;
    for (long t = 0; t < max_steps; ++t) {
        const Vector link = eta - a * theta;
        const Vector g_theta = -a.transpose() * link + lambda * theta;
        const Vector g_eta = (eta - z) + link;
        const Matrix g_a = -link * theta.transpose() + mu * mu * (a - s);

        const double grad_norm = std::sqrt(g_theta.squaredNorm() + g_eta.squaredNorm() +
                                           g_a.squaredNorm());
        result.steps = t;
        if (grad_norm <= grad_tol) {
            break;
        }

        const Vector theta_next = theta - step * g_theta;
        const Vector eta_next = eta - step * g_eta;
        const Matrix a_next = a - step * g_a;
        const double next = value(theta_next, eta_next, a_next);
        if (next > current) {
            step *= 0.5;
            continue;
        }
        theta = theta_next;
        eta = eta_next;
        a = a_next;
        current = next;
        step = std::min(step * 1.05, step_cap);
    }
    result.theta = theta;
    result.eta = eta;
    result.a = a;
    result.objective = current;
    return result;
}

}  // namespace eio::oracle
