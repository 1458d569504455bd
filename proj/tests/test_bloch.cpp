#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "blip/bloch.hpp"
#include "oracles/bloch_ode.hpp"
#include "test_util.hpp"

using namespace blip;

namespace {

ExcitationSequence constant_train(std::size_t length, double alpha_deg, double tr) {
  ExcitationSequence e;
  e.flip_angles.assign(length, alpha_deg * std::numbers::pi / 180.0);
  e.rep_times.assign(length, tr);
  return e;
}

}  // namespace

TEST(Bloch, ZeroFlipsGiveZeroSequence) {
  auto exc = constant_train(30, 0.0, 10.0);
  for (auto z : simulate_response({800.0, 60.0, 25.0}, exc)) EXPECT_EQ(z, Complex(0.0, 0.0));
}

TEST(Bloch, MatchesOdeConstantTrain) {
  const auto exc = constant_train(10, 30.0, 10.0);
  const auto got = simulate_response({500.0, 100.0, 0.0}, exc);
  const auto ref = oracle::ir_ssfp(500.0, 100.0, 0.0, exc.flip_angles, exc.rep_times);
  EXPECT_LE(testutil::rel_diff(got, ref), 1e-6);
}

TEST(Bloch, MatchesOdeWithOffResonanceAndVaryingTr) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> tr(5.0, 15.0), a(-0.6, 0.6);
  ExcitationSequence exc;
  for (int t = 0; t < 8; ++t) {
    exc.flip_angles.push_back(a(rng));
    exc.rep_times.push_back(tr(rng));
  }
  const auto got = simulate_response({900.0, 70.0, 37.0}, exc);
  const auto ref = oracle::ir_ssfp(900.0, 70.0, 37.0, exc.flip_angles, exc.rep_times);
  EXPECT_LE(testutil::rel_diff(got, ref), 1e-6);
}

TEST(Bloch, OnResonanceResponseIsPurelyImaginary) {
  const auto exc = random_excitation(100, 10.0, 10.0, 3);
  for (auto z : simulate_response({1200.0, 90.0, 0.0}, exc)) EXPECT_EQ(z.real(), 0.0);
}

TEST(Bloch, RejectsInvalidInputs) {
  const auto exc = constant_train(4, 10.0, 10.0);
  EXPECT_THROW(simulate_response({-1.0, 50.0, 0.0}, exc), DomainError);
  EXPECT_THROW(simulate_response({500.0, 0.0, 0.0}, exc), DomainError);
  ExcitationSequence bad = exc;
  bad.rep_times.pop_back();
  EXPECT_THROW(simulate_response({500.0, 50.0, 0.0}, bad), DomainError);
  bad = exc;
  bad.rep_times[1] = 0.0;
  EXPECT_THROW(simulate_response({500.0, 50.0, 0.0}, bad), DomainError);
}

TEST(Bloch, ScaleResponse) {
  const auto r = simulate_response({500.0, 50.0, 0.0}, random_excitation(20, 10.0, 10.0, 1));
  for (auto z : scale_response(0.0, r)) EXPECT_EQ(z, Complex(0.0, 0.0));
  EXPECT_EQ(scale_response(1.0, r), r);
  const auto s = scale_response(2.5, r);
  for (std::size_t t = 0; t < r.size(); ++t) EXPECT_EQ(s[t], 2.5 * r[t]);
  EXPECT_THROW(scale_response(-0.1, r), DomainError);
}

TEST(Bloch, RandomExcitationDeterministicAndCalibrated) {
  EXPECT_EQ(random_excitation(50, 10.0, 10.0, 9), random_excitation(50, 10.0, 10.0, 9));
  EXPECT_NE(random_excitation(50, 10.0, 10.0, 9), random_excitation(50, 10.0, 10.0, 10));
  const auto e = random_excitation(100000, 10.0, 10.0, 4);
  double s2 = 0.0;
  for (double a : e.flip_angles) s2 += a * a;
  const double sd_deg = std::sqrt(s2 / e.flip_angles.size()) * 180.0 / std::numbers::pi;
  EXPECT_NEAR(sd_deg, 10.0, 0.2);
  for (double tr : e.rep_times) EXPECT_EQ(tr, 10.0);
}

TEST(Dictionary, DefaultGridHas3379Atoms) {
  const auto g = ParameterGrid::brain_default();
  EXPECT_EQ(g.t1.values().size(), 107u);
  EXPECT_EQ(g.t2.values().size(), 37u);
  const auto d = build_dictionary(g, random_excitation(4, 10.0, 10.0, 1));
  EXPECT_EQ(d.size(), 3379u);
  EXPECT_EQ(d.filtered_count(), 107u * 37u - 3379u);
  for (const auto& p : d.lut()) EXPECT_LE(p.t2, p.t1);
}

TEST(Dictionary, SingleTripleMatchesSimulator) {
  ParameterGrid g;
  g.t1.segments = {{700.0, 700.0, 0.0}};
  g.t2.segments = {{60.0, 60.0, 0.0}};
  g.df.segments = {{5.0, 5.0, 0.0}};
  const auto exc = random_excitation(40, 10.0, 10.0, 2);
  const auto d = build_dictionary(g, exc);
  ASSERT_EQ(d.size(), 1u);
  const auto ref = simulate_response({700.0, 60.0, 5.0}, exc);
  EXPECT_TRUE(std::equal(ref.begin(), ref.end(), d.atom(0).begin()));
}

TEST(Dictionary, NormsMatchDirectSummation) {
  const auto d = build_dictionary(testutil::small_grid(), random_excitation(64, 10.0, 10.0, 5));
  for (std::size_t k = 0; k < d.size(); ++k) {
    double s = 0.0;
    for (auto z : d.atom(k)) s += z.real() * z.real() + z.imag() * z.imag();
    EXPECT_NEAR(d.atom_norms_sq()[k], s, 1e-12 * s);
    EXPECT_NEAR(d.atom_norms()[k], std::sqrt(s), 1e-12 * std::sqrt(s));
  }
}

TEST(Dictionary, LexicographicOrder) {
  const auto d = build_dictionary(testutil::small_grid(), random_excitation(8, 10.0, 10.0, 5));
  for (std::size_t k = 1; k < d.size(); ++k) EXPECT_LT(d.lut()[k - 1], d.lut()[k]);
}

TEST(Dictionary, RejectsBadGrids) {
  ParameterGrid g = testutil::small_grid();
  g.t1.segments = {{10.0, 10.0, 0.0}};  // every t2 > t1
  EXPECT_THROW(build_dictionary(g, random_excitation(8, 10.0, 10.0, 1)), Error);
  g = testutil::small_grid();
  g.t2.segments = {{20.0, 100.0, 0.0}};
  EXPECT_THROW(build_dictionary(g, random_excitation(8, 10.0, 10.0, 1)), Error);
}

TEST(Dictionary, ConstructorValidation) {
  const auto exc = random_excitation(2, 10.0, 10.0, 1);
  std::vector<Complex> atoms{{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  EXPECT_NO_THROW(BlochDictionary(atoms, {{1, 1, 0}, {2, 1, 0}}, exc));
  EXPECT_THROW(BlochDictionary(atoms, {{1, 1, 0}, {1, 1, 0}}, exc), Error);
  EXPECT_THROW(BlochDictionary(atoms, {{1, 1, 0}}, exc), Error);
  std::vector<Complex> zero{{0, 0}, {0, 0}, {0, 3}, {0, 4}};
  EXPECT_THROW(BlochDictionary(zero, {{1, 1, 0}, {2, 1, 0}}, exc), Error);
}

TEST(Grid, StringRoundTrip) {
  const auto g = ParameterGrid::brain_default();
  EXPECT_EQ(ParameterGrid::parse(g.to_string()), g);
  EXPECT_EQ(g.to_string(), "t1=80:2000:20,2300:5000:300;t2=20:300:10,500:1900:200;df=0:0:0");
  EXPECT_THROW(ParameterGrid::parse("t1=1:2"), Error);
}
