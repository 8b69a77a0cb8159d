#include "fsrg/feshbach.hpp"
#include "fsrg/config.hpp"
#include "fsrg/rg.hpp"
#include "reference.hpp"

#include <doctest.h>

#include <cmath>

using namespace fsrg;

TEST_CASE("cutoff functions") {
  CHECK(smooth_cutoff(0.0) == 1.0);
  CHECK(smooth_cutoff(0.75) == 1.0);
  CHECK(smooth_cutoff(1.0) == 0.0);
  CHECK(smooth_cutoff(1.3) == 0.0);
  const Cutoff c{0.5};
  for (double r = 0; r < 0.7; r += 0.01) {
    CHECK(std::abs(c.chi(r) * c.chi(r) + c.chibar(r) * c.chibar(r) - 1) < 1e-14);
    CHECK(c.chi(r) >= 0);
  }
  // Monotone through the transition band.
  for (double r = 0.75; r < 1.0; r += 0.01) CHECK(smooth_cutoff(r + 0.01) <= smooth_cutoff(r));
}

TEST_CASE("isospectrality on seeded random pairs") {
  for (int k = 0; k < 100; ++k) {
    const Index dim = 8 + (k * 7) % 33;
    const RandomPair rp = make_random_pair(dim, k % 3, 1000 + k);
    const FeshbachPair pair(rp.h, rp.t, rp.chi, rp.chibar);
    REQUIRE(pair.report().pass);
    const IsospectralityReport iso = isospectrality_suite(pair);
    INFO("pair " << k << " dim " << dim);
    CHECK(iso.kernel_h == rp.planted_kernel);
    CHECK(iso.kernel_f == iso.kernel_h);
    CHECK(iso.pass(1e-9));
  }
}

TEST_CASE("map against the textbook Schur complement") {
  const RandomPair rp = make_random_pair(24, 0, 5);
  const FeshbachPair pair(rp.h, rp.t, rp.chi, rp.chibar);
  const Matrix w = rp.h - rp.t;
  const Matrix hbar = rp.t + rp.chibar * w * rp.chibar;
  // F = T + chi W chi - chi W chibar Hbar^{-1} chibar W chi
  const Matrix f = rp.t + rp.chi * w * rp.chi -
                   rp.chi * w * rp.chibar * hbar.partialPivLu().solve(rp.chibar * w * rp.chi);
  CHECK(op_norm(Matrix(pair.map() - f)) < 1e-12);
  CHECK(op_norm(Matrix(pair.map_between(rp.chi, rp.chi) - rp.chi * pair.map() * rp.chi)) < 1e-12);
}

TEST_CASE("model first pair") {
  for (const char* name : {"m_triv", "m_exact", "m_pauli", "m_kramers", "m_rot"}) {
    const ModelSpec m = load_model(ref::fixture(std::string("models/") + name + ".json"));
    const FockBasis full(ModeGrid::geometric(0.5, 6), 2, 2.0, m.atomic_dim);
    const FirstFeshbach first(m, 0.0, 0.1, full, atomic_frame(m, 0.0));
    const Complex z = first.atomic_energy() + Complex(0.01, 0.01);
    const IsospectralityReport iso = isospectrality_suite(first.pair(z));
    INFO(name);
    CHECK(iso.pass(1e-9));
    // The reduced operator is singular exactly at an eigenvalue of H.
    const auto t = ref::hamiltonian(m, 0.0, 0.1, 6, 2, 2.0);
    const Complex lambda = ref::spectrum(t.h).front();
    const auto at = first.evaluate(lambda);
    CHECK(min_singular_value(at.reduced) < 1e-10);
    CHECK(min_singular_value(first.evaluate(lambda + 0.003).reduced) > 1e-4);
  }
}

TEST_CASE("Neumann expansion reproduces the map") {
  const ModelSpec m = load_model(ref::fixture("models/m_pauli.json"));
  const FockBasis full(ModeGrid::geometric(0.5, 5), 2, 2.0, 3);
  const FirstFeshbach first(m, 0.0, 0.1, full, atomic_frame(m, 0.0));
  const auto r = first.evaluate(-0.02, false, true);
  CHECK(r.neumann_done);
  CHECK(r.neumann_converged);
  CHECK(r.neumann_discrepancy < 1e-12);
  CHECK(r.neumann_discrepancy <= r.neumann_tail_bound + 1e-14);
}

TEST_CASE("pair failure is reported") {
  RandomPair rp = make_random_pair(12, 0, 3);
  rp.t.diagonal().tail(3).setZero();  // T singular where chibar lives
  CHECK_FALSE(verify_pair(rp.h, rp.t, rp.chi, rp.chibar).pass);
}
