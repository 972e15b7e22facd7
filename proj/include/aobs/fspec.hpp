#pragma once

#include <string>
#include <vector>

namespace aobs {

// Distribution of capture probabilities P on (0,1] for the known-p theory:
// beta(a,b), finite atoms, or a histogram density with equal-width bins
// tiling (0,1].
struct FSpec {
  enum class Kind { beta, atoms, histogram };

  Kind kind = Kind::beta;
  double a = 1.0, b = 1.0;            // beta
  std::vector<double> atom_p;         // atoms: support, each in (0,1]
  std::vector<double> atom_w;         // atoms: weights, normalized on validate()
  std::vector<double> hist_heights;   // histogram: densities per bin, bin j covers
                                      // (j*h, (j+1)*h] with h = 1/heights.size()

  static FSpec beta_spec(double a, double b);
  static FSpec atoms_spec(std::vector<double> p, std::vector<double> w);
  static FSpec histogram_spec(std::vector<double> heights);

  void validate() const;

  // Restricted moments over {P > alpha}; alpha = 0 gives the full moments.
  // mass(alpha) = P(P > alpha).
  double mass_above(double alpha) const;
  // E[P | P > alpha] * P(P > alpha) etc. are exposed as plain restricted
  // integrals so callers can normalize the way each formula needs.
  double integral_p(double alpha) const;        // int_{p>alpha} p dF
  double integral_inv_p(double alpha) const;    // int_{p>alpha} p^-1 dF; may be +inf
  bool inv_p_diverges(double alpha) const;      // true when the alpha=0 integral diverges

  double mean_p() const { return integral_p(0.0); }

  std::string describe() const;
};

}  // namespace aobs
