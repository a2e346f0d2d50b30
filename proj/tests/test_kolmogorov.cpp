#include <doctest.h>

#include <cmath>

#include "rok/kolmogorov.hpp"
#include "test_support.hpp"

using namespace rok;
using namespace rok::testing;

TEST_CASE("factorize recovers hand-checked factorizations") {
    SUBCASE("rank-one all-ones kernel") {
        ComplexMatrix k(2, 2);
        k << 1, 1, 1, 1;
        KolmogorovFactor f = factorize(OperatorKernel::scalar(k));
        REQUIRE(f.rank == 1);
        CHECK(std::abs((f.factors[0].adjoint() * f.factors[0])(0, 0) - Complex(1, 0)) <= 1e-12);
        CHECK(std::abs((f.factors[0].adjoint() * f.factors[1])(0, 0) - Complex(1, 0)) <= 1e-12);
    }

    SUBCASE("identity kernel gives orthonormal blocks at full rank") {
        const std::size_t d = 2, n = 3;
        KolmogorovFactor f = factorize(OperatorKernel::identity({"a", "b", "c"}, d));
        REQUIRE(f.rank == n * d);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                ComplexMatrix prod = f.factors[i].adjoint() * f.factors[j];
                ComplexMatrix expected = ComplexMatrix::Zero(d, d);
                if (i == j) expected = ComplexMatrix::Identity(d, d);
                CHECK(max_abs(prod - expected) <= 1e-12);
            }
    }

    SUBCASE("full-rank 2x2 scalar kernel") {
        ComplexMatrix k(2, 2);
        k << 2, 1, 1, 2;
        KolmogorovFactor f = factorize(OperatorKernel::scalar(k));
        REQUIRE(f.rank == 2);
        CHECK(std::abs((f.factors[0].adjoint() * f.factors[0])(0, 0) - Complex(2, 0)) <= 1e-10);
        CHECK(std::abs((f.factors[0].adjoint() * f.factors[1])(0, 0) - Complex(1, 0)) <= 1e-10);
    }

    SUBCASE("indefinite kernel is rejected") {
        ComplexMatrix k(2, 2);
        k << 0, 1, 1, 0;
        CHECK_THROWS_AS(factorize(OperatorKernel::scalar(k)), NotPositiveDefinite);
    }
}

TEST_CASE("reconstruction_error detects mismatch and closes the loop") {
    SeededRng rng(21);

    SUBCASE("round trip over random pd kernels") {
        for (int rep = 0; rep < 50; ++rep) {
            SeededRng sub = rng.split(rep);
            const std::size_t n = 1 + rep % 6, d = 1 + rep % 4;
            const std::size_t r = 1 + static_cast<std::size_t>(sub.uniform() * (n * d));
            OperatorKernel k = random_pd_kernel(sub, n, d, r);
            KolmogorovFactor f = factorize(k);
            const double scale = max_abs(assemble_gram(k).matrix);
            CHECK(reconstruction_error(f, k) <= 1e-8 * std::max(1.0, scale));
        }
    }

    SUBCASE("shifted kernel is detected") {
        OperatorKernel k = random_pd_kernel(rng, 3, 2, 4);
        KolmogorovFactor f = factorize(k);
        OperatorKernel shifted = k + OperatorKernel::identity(k.points(), k.dim());
        CHECK(reconstruction_error(f, shifted) >= 1.0 - 1e-8);
    }

    SUBCASE("zero kernel against an empty-rank factor") {
        ComplexMatrix z = ComplexMatrix::Zero(2, 2);
        OperatorKernel zero = OperatorKernel::scalar(z);
        KolmogorovFactor empty;
        empty.points = zero.points();
        empty.dim = 1;
        empty.rank = 0;
        empty.factors = {ComplexMatrix::Zero(0, 1), ComplexMatrix::Zero(0, 1)};
        CHECK(reconstruction_error(empty, zero) == 0.0);
        CHECK(factorize(zero).rank == 0);
    }
}

TEST_CASE("rank reporting") {
    SeededRng rng(22);

    SUBCASE("known-rank kernels recover their rank") {
        for (int rep = 0; rep < 30; ++rep) {
            SeededRng sub = rng.split(rep);
            const std::size_t n = 2 + rep % 4, d = 1 + rep % 3;
            const std::size_t r0 = 1 + static_cast<std::size_t>(sub.uniform() * (n * d));
            OperatorKernel k = random_pd_kernel(sub, n, d, r0);
            CHECK(factorize(k, 1e-10).rank == std::min(r0, n * d));
        }
    }

    SUBCASE("rank never exceeds N*d") {
        OperatorKernel k = random_pd_kernel(rng, 2, 2, 9);
        CHECK(factorize(k).rank <= 4);
    }
}

TEST_CASE("gauge freedom: left-unitary rotations preserve the kernel") {
    SeededRng rng(23);
    for (int rep = 0; rep < 10; ++rep) {
        SeededRng sub = rng.split(rep);
        OperatorKernel k = random_pd_kernel(sub, 2 + rep % 3, 2, 3);
        KolmogorovFactor f = factorize(k);
        ComplexMatrix q = random_unitary(sub, f.rank);
        KolmogorovFactor rotated = f;
        for (auto& v : rotated.factors) v = q * v;
        const double scale = std::max(1.0, max_abs(assemble_gram(k).matrix));
        CHECK(reconstruction_error(rotated, k) <= 1e-8 * scale);
    }
}

TEST_CASE("trace_diagonal") {
    SUBCASE("identity block") {
        std::vector<double> tr = trace_diagonal(OperatorKernel::identity({"s"}, 2));
        REQUIRE(tr.size() == 1);
        CHECK(tr[0] == doctest::Approx(2.0));
    }

    SUBCASE("rank-deficient diagonal") {
        ComplexMatrix b(2, 2);
        b << 0, 0, 0, 1;
        OperatorKernel k({"s"}, 2, {b});
        CHECK(trace_diagonal(k)[0] == doctest::Approx(1.0));
    }

    SUBCASE("scalar kernel reads the diagonal") {
        ComplexMatrix k(2, 2);
        k << 2, 1, 1, 2;
        std::vector<double> tr = trace_diagonal(OperatorKernel::scalar(k));
        CHECK(tr[0] == doctest::Approx(2.0));
        CHECK(tr[1] == doctest::Approx(2.0));
    }

    SUBCASE("trace identity tr(V_s* V_s) = tr K(s,s)") {
        SeededRng rng(24);
        for (int rep = 0; rep < 20; ++rep) {
            SeededRng sub = rng.split(rep);
            OperatorKernel k = random_pd_kernel(sub, 2 + rep % 4, 1 + rep % 3, 2 + rep % 3);
            KolmogorovFactor f = factorize(k);
            std::vector<double> tr = trace_diagonal(k);
            for (std::size_t i = 0; i < tr.size(); ++i) {
                const double via_factor = (f.factors[i].adjoint() * f.factors[i]).trace().real();
                CHECK(std::abs(via_factor - tr[i]) <= 1e-10 * std::max(1.0, std::abs(tr[i])));
            }
        }
    }
}
