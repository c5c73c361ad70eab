#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <limits>

#include "boselearn/fock.hpp"

using namespace boselearn;

TEST_CASE("index <-> occupation tuple is a bijection") {
    FockVector st(3, 4);
    for (std::size_t i = 0; i < st.dim(); ++i) {
        const auto occ = st.to_tuple(i);
        REQUIRE(st.to_index(occ) == i);
        for (int m = 0; m < 3; ++m) REQUIRE(st.occupation(i, m) == occ[static_cast<std::size_t>(m)]);
    }
}

TEST_CASE("coherent state basics") {
    SECTION("alpha = 0 is vacuum with zero leakage") {
        const auto st = coherent_state(cplx(0, 0), 2, 0, 6);
        REQUIRE(std::abs(st.amps[0] - cplx(1, 0)) < 1e-15);
        REQUIRE(st.leakage == 0.0);
    }
    SECTION("mean occupation equals |alpha|^2") {
        const auto st = coherent_state(cplx(0.5, 0), 1, 0, 16);
        const cplx n = expectation(ModeOperator{OpKind::Number, 0}, st);
        REQUIRE(std::abs(n.real() - 0.25) < 1e-10);
        REQUIRE(std::abs(n.imag()) < 1e-12);
    }
    SECTION("amplitude at k = 2 for alpha = 0.4 matches the series") {
        const auto st = coherent_state(cplx(0.4, 0), 1, 0, 20);
        const double expect = std::exp(-0.08) * 0.16 / std::sqrt(2.0);
        REQUIRE(std::abs(st.amps[2].real() - expect) < 1e-12);
    }
    SECTION("precondition breaches throw") {
        REQUIRE_THROWS_AS(coherent_state(cplx(2.0, 0), 1, 0, 4), std::invalid_argument);  // |a|^2 > cutoff/4
        REQUIRE_THROWS_AS(coherent_state(cplx(std::numeric_limits<double>::quiet_NaN(), 0), 1, 0, 8),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(coherent_state(cplx(0.1, 0), 2, 5, 8), std::out_of_range);
    }
}

TEST_CASE("operator actions on eigenstates") {
    FockVector st(1, 8);
    st.amps[3] = cplx(1, 0);  // |3>
    SECTION("number operator eigenstate") {
        const auto out = apply_operator({OpKind::Number, 0}, st);
        REQUIRE(std::abs(out.amps[3] - cplx(3, 0)) < 1e-15);
    }
    SECTION("annihilation of vacuum is zero") {
        FockVector vac(1, 8);
        vac.amps[0] = cplx(1, 0);
        const auto out = apply_operator({OpKind::Annihilate, 0}, vac);
        REQUIRE(out.norm() == 0.0);
    }
    SECTION("mode out of range") {
        REQUIRE_THROWS_AS(apply_operator({OpKind::Number, 1}, st), std::out_of_range);
    }
}

TEST_CASE("quadrature expectations on coherent states") {
    const auto st = coherent_state(cplx(0.5, 0), 1, 0, 20);
    SECTION("<X> = sqrt(2) Re alpha") {
        const cplx x = expectation(ModeOperator{OpKind::QuadX, 0}, st);
        REQUIRE(std::abs(x.real() - std::sqrt(2.0) * 0.5) < 1e-8);
    }
    SECTION("<b> = alpha") {
        const cplx b = expectation(ModeOperator{OpKind::Annihilate, 0}, st);
        REQUIRE(std::abs(b - cplx(0.5, 0)) < 1e-8);
    }
    SECTION("<X^2> = 2 (Re alpha)^2 + 1/2 via the operator product") {
        const ModeOperator ops[] = {{OpKind::QuadX, 0}, {OpKind::QuadX, 0}};
        const cplx x2 = expectation(std::span<const ModeOperator>(ops, 2), st);
        REQUIRE(std::abs(x2.real() - (2 * 0.25 + 0.5)) < 1e-8);
        REQUIRE(std::abs(x2.imag()) < 1e-10);
    }
    SECTION("complex alpha too") {
        const auto sc = coherent_state(cplx(0.3, 0.4), 1, 0, 20);
        const ModeOperator ops[] = {{OpKind::QuadX, 0}, {OpKind::QuadX, 0}};
        const cplx x2 = expectation(std::span<const ModeOperator>(ops, 2), sc);
        REQUIRE(std::abs(x2.real() - (2 * 0.09 + 0.5)) < 1e-8);
    }
    SECTION("non-normalized state is rejected") {
        FockVector bad = st;
        bad.amps[0] += cplx(0.1, 0);
        REQUIRE_THROWS_AS(expectation(ModeOperator{OpKind::Number, 0}, bad), std::invalid_argument);
    }
}

TEST_CASE("ladder matrix identities on the truncated space") {
    const int c = 6;
    FockVector basis(1, c);
    for (int k = 0; k <= c; ++k) {
        std::fill(basis.amps.begin(), basis.amps.end(), cplx(0, 0));
        basis.amps[static_cast<std::size_t>(k)] = cplx(1, 0);
        // b†b = n on every index, including the last row
        auto bdb = apply_operator({OpKind::Create, 0}, apply_operator({OpKind::Annihilate, 0}, basis));
        REQUIRE(std::abs(bdb.amps[static_cast<std::size_t>(k)] - cplx(k, 0)) < 1e-14);
        // [b, b†] = I for k < cutoff; at k = cutoff the truncation rule gives -c
        auto bbd = apply_operator({OpKind::Annihilate, 0}, apply_operator({OpKind::Create, 0}, basis));
        const double comm = (bbd.amps[static_cast<std::size_t>(k)] - bdb.amps[static_cast<std::size_t>(k)]).real();
        if (k < c)
            REQUIRE(std::abs(comm - 1.0) < 1e-14);
        else
            REQUIRE(std::abs(comm + static_cast<double>(c)) < 1e-14);
    }
}

TEST_CASE("X and P are built from the ladder pair") {
    // X = (b + b†)/sqrt(2), P = i(b† - b)/sqrt(2) as matrix identities
    const int c = 5;
    FockVector e(1, c);
    for (int k = 0; k <= c; ++k) {
        std::fill(e.amps.begin(), e.amps.end(), cplx(0, 0));
        e.amps[static_cast<std::size_t>(k)] = cplx(1, 0);
        const auto x = apply_operator({OpKind::QuadX, 0}, e);
        const auto b = apply_operator({OpKind::Annihilate, 0}, e);
        const auto bd = apply_operator({OpKind::Create, 0}, e);
        const auto p = apply_operator({OpKind::QuadP, 0}, e);
        for (std::size_t i = 0; i < e.dim(); ++i) {
            REQUIRE(std::abs(x.amps[i] - (b.amps[i] + bd.amps[i]) / std::sqrt(2.0)) < 1e-14);
            REQUIRE(std::abs(p.amps[i] - cplx(0, 1) * (bd.amps[i] - b.amps[i]) / std::sqrt(2.0)) < 1e-14);
        }
    }
}

TEST_CASE("product state assembles per-mode amplitudes") {
    const auto a = coherent_amplitudes(cplx(0.3, 0), 4);
    const auto b = coherent_amplitudes(cplx(0, 0.2), 4);
    const auto st = product_state({a, b}, 4);
    FockVector ref(2, 4);
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; j <= 4; ++j) {
            const int occ[2] = {i, j};
            ref.amps[ref.to_index(std::span<const int>(occ, 2))] =
                a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
        }
    for (std::size_t i = 0; i < st.dim(); ++i) REQUIRE(std::abs(st.amps[i] - ref.amps[i]) < 1e-14);
}
