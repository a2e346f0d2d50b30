#include <doctest.h>

#include <cmath>

#include "rok/moment.hpp"
#include "test_support.hpp"

using namespace rok;
using namespace rok::testing;

namespace {

ComplexMatrix nilpotent_2x2() {
    ComplexMatrix a(2, 2);
    a << 0, 1, 0, 0;
    return a;
}

/// K'(m,n) = W* U*^m P U^n W for m,n <= depth, as an OperatorKernel.
OperatorKernel reconstructed_kernel(const DilationTriple& t, std::size_t depth) {
    std::vector<ComplexMatrix> uw(depth + 1);
    uw[0] = t.isometry;
    for (std::size_t n = 1; n <= depth; ++n) uw[n] = t.unitary * uw[n - 1];
    std::vector<std::string> pts(depth + 1);
    std::vector<ComplexMatrix> blocks((depth + 1) * (depth + 1));
    for (std::size_t i = 0; i <= depth; ++i) pts[i] = std::to_string(i);
    for (std::size_t m = 0; m <= depth; ++m)
        for (std::size_t n = 0; n <= depth; ++n)
            blocks[m * (depth + 1) + n] = uw[m].adjoint() * t.projection * uw[n];
    return OperatorKernel(std::move(pts), t.dim, std::move(blocks), 1e-6);
}

}  // namespace

TEST_CASE("moment_kernel computes exact mixed moments") {
    SUBCASE("nilpotent deterministic operator") {
        RandomOperator a = RandomOperator::deterministic(nilpotent_2x2());
        MomentKernel k = moment_kernel(a, 2);
        CHECK(max_abs(k.block(0, 0) - ComplexMatrix::Identity(2, 2)) == 0.0);
        ComplexMatrix d01(2, 2);
        d01 << 0, 0, 0, 1;
        CHECK(max_abs(k.block(1, 1) - d01) == 0.0);
        CHECK(max_abs(k.block(0, 1) - nilpotent_2x2()) == 0.0);
        for (std::size_t m = 0; m <= 2; ++m)
            for (std::size_t n = 0; n <= 2; ++n)
                if (m >= 2 || n >= 2) CHECK(max_abs(k.block(m, n)) == 0.0);
    }

    SUBCASE("plus-minus-half scalar matches enumeration") {
        auto law = std::vector<std::pair<double, Complex>>{{0.5, 0.5}, {0.5, -0.5}};
        MomentKernel k = moment_kernel(half_scalar_operator(), 2);
        for (std::size_t m = 0; m <= 2; ++m)
            for (std::size_t n = 0; n <= 2; ++n)
                CHECK(std::abs(k.block(m, n)(0, 0) - scalar_moment(law, m, n)) == 0.0);
        CHECK(k.block(0, 2)(0, 0) == Complex(0.25, 0));
        CHECK(k.block(1, 1)(0, 0) == Complex(0.25, 0));
        CHECK(k.block(2, 2)(0, 0) == Complex(0.0625, 0));
        CHECK(k.block(0, 1)(0, 0) == Complex(0, 0));
    }

    SUBCASE("random sign times identity in any dimension") {
        const std::size_t d = 3;
        ComplexMatrix eye = ComplexMatrix::Identity(d, d);
        RandomOperator a(d, {{0.5, eye}, {0.5, ComplexMatrix(-eye)}});
        MomentKernel k = moment_kernel(a, 3);
        for (std::size_t m = 0; m <= 3; ++m)
            for (std::size_t n = 0; n <= 3; ++n) {
                ComplexMatrix expected = ComplexMatrix::Zero(d, d);
                if ((m + n) % 2 == 0) expected = eye;
                CHECK(max_abs(k.block(m, n) - expected) == 0.0);
            }
    }

    SUBCASE("moment kernels are pd and Hermitian-paired") {
        SeededRng rng(61);
        for (int rep = 0; rep < 15; ++rep) {
            SeededRng sub = rng.split(rep);
            RandomOperator a = random_contraction_operator(sub, 1 + rep % 3, 1 + rep % 4);
            MomentKernel k = moment_kernel(a, 2 + rep % 4);
            CHECK(check_pd(k.as_kernel()).is_pd);
            for (std::size_t m = 0; m <= k.max_power(); ++m)
                for (std::size_t n = 0; n <= k.max_power(); ++n)
                    CHECK(max_abs(k.block(n, m) - ComplexMatrix(k.block(m, n).adjoint())) <=
                          1e-14);
        }
    }
}

TEST_CASE("shift_domination") {
    SUBCASE("plus-minus-half: difference kernel is diag(3/4, 3/16)") {
        MomentKernel k = moment_kernel(half_scalar_operator(), 2);
        OperatorKernel diff = initial_restriction(k.as_kernel()) - shift_kernel(k.as_kernel());
        CHECK(diff.block(0, 0)(0, 0) == Complex(0.75, 0));
        CHECK(diff.block(0, 1)(0, 0) == Complex(0, 0));
        CHECK(diff.block(1, 1)(0, 0) == Complex(0.1875, 0));
        CHECK(shift_domination(k).holds);
    }

    SUBCASE("expanding deterministic operator fails with eigenvalue -3") {
        RandomOperator a = RandomOperator::scalar({{1.0, Complex(2.0, 0.0)}});
        DominationReport r = shift_domination(moment_kernel(a, 1));
        CHECK_FALSE(r.holds);
        CHECK(r.min_eigenvalue == doctest::Approx(-3.0).epsilon(1e-12));
    }

    SUBCASE("stationary boundary: difference vanishes") {
        DominationReport r = shift_domination(moment_kernel(sign_scalar_operator(), 2));
        CHECK(r.holds);
        CHECK(std::abs(r.min_eigenvalue) <= 1e-14);
    }
}

TEST_CASE("build_shift") {
    SUBCASE("stationary operator gives an isometric shift") {
        ShiftResult s = build_shift(moment_kernel(sign_scalar_operator(), 4));
        CHECK(s.isometry_defect <= 1e-8);
        CHECK(s.op_norm == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(s.consistency_residual <= 1e-10);
    }

    SUBCASE("plus-minus-half shift has operator norm one half") {
        ShiftResult s = build_shift(moment_kernel(half_scalar_operator(), 4));
        CHECK(std::abs(s.op_norm - 0.5) <= 1e-8);
        CHECK(s.consistency_residual <= 1e-10);
        CHECK(s.isometry_defect > 0.5);  // strictly non-isometric
    }

    SUBCASE("nilpotent operator annihilates the last factor") {
        RandomOperator a = RandomOperator::deterministic(nilpotent_2x2());
        ShiftResult s = build_shift(moment_kernel(a, 2));
        CHECK(max_abs(s.shift * s.factor.factors[1]) <= 1e-10);
        CHECK(s.op_norm <= 1.0 + 1e-8);
    }

    SUBCASE("domination violation raises") {
        RandomOperator a = RandomOperator::scalar({{1.0, Complex(2.0, 0.0)}});
        CHECK_THROWS_AS(build_shift(moment_kernel(a, 2)), ShiftDominationViolated);
    }
}

TEST_CASE("stationarity is equivalent to an isometric shift") {
    SeededRng rng(62);
    for (int rep = 0; rep < 12; ++rep) {
        SeededRng sub = rng.split(rep);
        RandomOperator a = rep % 3 == 0
                               ? sign_scalar_operator()
                               : random_contraction_operator(sub, 1 + rep % 2, 1 + rep % 3);
        MomentKernel k = moment_kernel(a, 3);
        OperatorKernel shifted = shift_kernel(k.as_kernel());
        OperatorKernel restricted = initial_restriction(k.as_kernel());
        const bool stationary =
            max_abs(stacked_blocks(restricted) - stacked_blocks(shifted)) <= 1e-12;
        ShiftResult s = build_shift(k);
        CHECK(stationary == (s.isometry_defect <= 1e-8));
    }
}

TEST_CASE("build_dilation and verify_dilation") {
    SUBCASE("nilpotent deterministic contraction dilates exactly") {
        RandomOperator a = RandomOperator::deterministic(nilpotent_2x2());
        MomentKernel k = moment_kernel(a, 2);
        DilationTriple t = build_dilation(k);
        VerificationReport r = verify_dilation(k, t);
        CHECK(r.max_residual <= 1e-8);
        CHECK(r.unitarity <= 1e-10);
        CHECK(r.projection <= 1e-10);
        CHECK(r.isometry <= 1e-10);
        CHECK(r.compression <= 1e-8);
        CHECK(r.c3_holds);
    }

    SUBCASE("plus-minus-half at depth 4") {
        MomentKernel k = moment_kernel(half_scalar_operator(), 4);
        DilationTriple t = build_dilation(k);
        CHECK(t.space_dim == t.rank * 5);
        VerificationReport r = verify_dilation(k, t);
        CHECK(r.max_residual <= 1e-8);
        CHECK(r.unitarity <= 1e-10);
        CHECK(r.projection <= 1e-10);
        CHECK(r.isometry <= 1e-10);
        CHECK(r.c3_holds);
    }

    SUBCASE("stationary case sits on the c3 boundary") {
        MomentKernel k = moment_kernel(sign_scalar_operator(), 3);
        VerificationReport r = verify_dilation(k, build_dilation(k));
        CHECK(r.c3_holds);
        CHECK(std::abs(r.c3_min_eigenvalue) <= 1e-8);
        CHECK(r.max_residual <= 1e-8);
    }

    SUBCASE("zero shift gives the pure cyclic block shift") {
        ComplexMatrix k(3, 3);
        k.setZero();
        k(0, 0) = 1.0;
        DilationTriple t = build_dilation(OperatorKernel::scalar(k));
        REQUIRE(t.rank == 1);
        REQUIRE(t.space_dim == 3);
        CHECK(max_abs(t.shift) == 0.0);
        ComplexMatrix cyclic = ComplexMatrix::Zero(3, 3);
        cyclic(0, 2) = 1;
        cyclic(1, 0) = 1;
        cyclic(2, 1) = 1;
        CHECK(max_abs(t.unitary - cyclic) <= 1e-12);
        CHECK(verify_dilation(OperatorKernel::scalar(k), t).unitarity <= 1e-12);
    }

    SUBCASE("tampering with U is detected") {
        MomentKernel k = moment_kernel(half_scalar_operator(), 4);
        DilationTriple t = build_dilation(k);
        DilationTriple tampered = t;
        tampered.unitary = t.unitary * t.unitary;
        CHECK(verify_dilation(k, tampered).max_residual > 0.1);
    }
}

TEST_CASE("domination and dilation are equivalent on random contractions") {
    SeededRng rng(63);

    SUBCASE("domination implies a verifiable dilation") {
        for (int rep = 0; rep < 15; ++rep) {
            SeededRng sub = rng.split(rep);
            RandomOperator a = random_contraction_operator(sub, 1 + rep % 3, 1 + rep % 4);
            MomentKernel k = moment_kernel(a, 2 + rep % 3);
            REQUIRE(shift_domination(k).holds);
            VerificationReport r = verify_dilation(k, build_dilation(k));
            CHECK(r.max_residual <= 1e-8);
            CHECK(r.unitarity <= 1e-10);
            CHECK(r.projection <= 1e-10);
            CHECK(r.isometry <= 1e-10);
            CHECK(r.c3_holds);
        }
    }

    SUBCASE("reconstructed kernels satisfy domination") {
        for (int rep = 0; rep < 10; ++rep) {
            SeededRng sub = rng.split(100 + rep);
            RandomOperator a = random_contraction_operator(sub, 1 + rep % 2, 1 + rep % 3);
            MomentKernel k = moment_kernel(a, 3);
            DilationTriple t = build_dilation(k);
            OperatorKernel reconstructed = reconstructed_kernel(t, t.trunc_depth);
            DominationReport r = shift_domination(reconstructed, 1e-8);
            CHECK(r.holds);
        }
    }

    SUBCASE("triples with commuting projection satisfy domination by construction") {
        for (int rep = 0; rep < 10; ++rep) {
            SeededRng sub = rng.split(200 + rep);
            const std::size_t dim_k = 6, d = 2;
            ComplexMatrix u = random_unitary(sub, dim_k);
            Eigen::ComplexEigenSolver<ComplexMatrix> es(u);
            REQUIRE(es.info() == Eigen::Success);
            // P projects onto a subset of eigenvectors, so U* P U = P.
            ComplexMatrix vecs = es.eigenvectors();
            ComplexMatrix p = ComplexMatrix::Zero(dim_k, dim_k);
            for (std::size_t i = 0; i < dim_k; i += 2)
                p += vecs.col(i) * vecs.col(i).adjoint();
            ComplexMatrix w_full = random_unitary(sub, dim_k);
            DilationTriple t;
            t.space_dim = dim_k;
            t.rank = dim_k;
            t.trunc_depth = 3;
            t.dim = d;
            t.unitary = u;
            t.projection = hermitized(p);
            t.isometry = w_full.leftCols(d);
            t.shift = ComplexMatrix::Zero(dim_k, dim_k);
            OperatorKernel reconstructed = reconstructed_kernel(t, 3);
            DominationReport r = shift_domination(reconstructed, 1e-8);
            CHECK(r.holds);
            CHECK(std::abs(r.min_eigenvalue) <= 1e-8);  // stationary boundary
        }
    }
}

TEST_CASE("von_neumann_check") {
    SUBCASE("degree one on contractive atoms") {
        SeededRng rng(64);
        RandomOperator a = random_contraction_operator(rng, 2, 3);
        VnReport r = von_neumann_check(a, {Complex(0, 0), Complex(1, 0)});
        CHECK(r.holds);
        CHECK(r.lhs_max_eigenvalue <= 1.0 + 1e-10);
        CHECK(r.sup_f == doctest::Approx(1.0));
    }

    SUBCASE("f(z) = z^2 on the plus-minus-half operator") {
        VnReport r = von_neumann_check(half_scalar_operator(),
                                       {Complex(0, 0), Complex(0, 0), Complex(1, 0)});
        CHECK(r.holds);
        CHECK(r.lhs(0, 0) == Complex(0.0625, 0));
        CHECK(r.sup_f == doctest::Approx(1.0));
    }

    SUBCASE("f(z) = 1 + z on the random sign") {
        VnReport r = von_neumann_check(sign_scalar_operator(), {Complex(1, 0), Complex(1, 0)});
        CHECK(r.holds);
        CHECK(r.lhs(0, 0) == Complex(2, 0));
        CHECK(r.sup_f == doctest::Approx(2.0));
        CHECK(r.lhs_max_eigenvalue <= 4.0);
    }

    SUBCASE("random contraction-polynomial pairs all hold") {
        SeededRng rng(65);
        for (int rep = 0; rep < 30; ++rep) {
            SeededRng sub = rng.split(rep);
            RandomOperator a = random_contraction_operator(sub, 1 + rep % 3, 1 + rep % 4);
            const std::size_t degree = 1 + rep % 5;
            std::vector<Complex> coeffs(degree + 1);
            for (auto& c : coeffs) c = Complex(sub.normal(), sub.normal());
            CHECK(von_neumann_check(a, coeffs).holds);
        }
    }

    SUBCASE("precondition and argument errors") {
        RandomOperator expanding = RandomOperator::scalar({{1.0, Complex(2.0, 0.0)}});
        CHECK_THROWS_AS(von_neumann_check(expanding, {Complex(0, 0), Complex(1, 0)}),
                        ShiftDominationViolated);
        RandomOperator a = half_scalar_operator();
        CHECK_THROWS_AS(von_neumann_check(a, {}), EmptyPolynomial);
        CHECK_THROWS_AS(von_neumann_check(a, {Complex(1, 0)}, 8), InvalidArgument);
    }
}
