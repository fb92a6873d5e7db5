#ifndef SOLICIT_STATS_H_
#define SOLICIT_STATS_H_

#include <cstdint>

namespace solicit {

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x),
// for a > 0 and x >= 0. Series expansion below x = a + 1, Lentz continued
// fraction above.
double RegularizedGammaP(double a, double x);
double RegularizedGammaQ(double a, double x);

// Upper tail of the chi-square distribution, Q(df/2, x/2).
double ChiSquarePValue(double statistic, int df);

// Standard normal CDF and its inverse (Acklam's rational approximation with
// one Newton refinement; absolute error below 1e-12 on (0, 1)).
double NormalCdf(double z);
double NormalQuantile(double p);

// Small deterministic generator with distributions defined here rather than
// by the standard library, so draws are identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t Next();
  // Uniform on [0, 1).
  double Uniform();
  // Uniform on (0, 1).
  double OpenUniform();
  // Uniform integer in [0, n).
  std::uint64_t Below(std::uint64_t n);
  double Normal();
  double Exponential(double mean);
  bool Bernoulli(double p);
  std::uint64_t Poisson(double mean);
  double Gamma(double shape);

 private:
  std::uint64_t state_;
};

}  // namespace solicit

#endif  // SOLICIT_STATS_H_
