#include "aobs/fspec.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "aobs/error.hpp"
#include "aobs/quadrature.hpp"

namespace aobs {
namespace {

constexpr double kLowerCut = 1e-12;  // quadrature never evaluates below this p

double beta_log_density_unnorm(double p, double a, double b) {
  return (a - 1.0) * std::log(p) + (b - 1.0) * std::log1p(-p);
}

// int_lo^hi p^(a-1) (1-p)^(b-1) dp / B(a,b)
double beta_restricted(double lo, double hi, double a, double b, double power_shift) {
  if (lo >= hi) return 0.0;
  const double log_norm = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  const double aa = a + power_shift;
  const auto f = [&](double p) {
    return std::exp(beta_log_density_unnorm(p, aa, b) - log_norm);
  };
  return integrate_or_throw(f, lo, hi, 1e-9, 1e-12);
}

}  // namespace

FSpec FSpec::beta_spec(double a, double b) {
  FSpec f;
  f.kind = Kind::beta;
  f.a = a;
  f.b = b;
  f.validate();
  return f;
}

FSpec FSpec::atoms_spec(std::vector<double> p, std::vector<double> w) {
  FSpec f;
  f.kind = Kind::atoms;
  f.atom_p = std::move(p);
  f.atom_w = std::move(w);
  f.validate();
  double total = 0.0;
  for (double x : f.atom_w) total += x;
  for (double& x : f.atom_w) x /= total;
  return f;
}

FSpec FSpec::histogram_spec(std::vector<double> heights) {
  FSpec f;
  f.kind = Kind::histogram;
  f.hist_heights = std::move(heights);
  f.validate();
  // rescale so the bin masses integrate to one
  const double h = 1.0 / static_cast<double>(f.hist_heights.size());
  double total = 0.0;
  for (double x : f.hist_heights) total += x * h;
  for (double& x : f.hist_heights) x /= total;
  return f;
}

void FSpec::validate() const {
  switch (kind) {
    case Kind::beta:
      if (!(a > 0.0) || !(b > 0.0)) fail(errc::unsupported_f, "beta F needs a, b > 0");
      break;
    case Kind::atoms: {
      if (atom_p.empty() || atom_p.size() != atom_w.size())
        fail(errc::unsupported_f, "atom F needs matching nonempty p/w vectors");
      double total = 0.0;
      for (std::size_t i = 0; i < atom_p.size(); ++i) {
        if (!(atom_p[i] > 0.0) || atom_p[i] > 1.0)
          fail(errc::unsupported_f, "atom locations must sit in (0,1]");
        if (!(atom_w[i] >= 0.0)) fail(errc::unsupported_f, "atom weights must be >= 0");
        total += atom_w[i];
      }
      if (!(total > 0.0)) fail(errc::zero_weight_vector, "atom weights sum to zero");
      break;
    }
    case Kind::histogram: {
      if (hist_heights.empty()) fail(errc::unsupported_f, "histogram F needs >= 1 bin");
      double total = 0.0;
      for (double x : hist_heights) {
        if (!(x >= 0.0)) fail(errc::unsupported_f, "histogram heights must be >= 0");
        total += x;
      }
      if (!(total > 0.0)) fail(errc::zero_weight_vector, "histogram heights sum to zero");
      break;
    }
  }
}

double FSpec::mass_above(double alpha) const {
  if (alpha < 0.0 || alpha >= 1.0) fail(errc::alpha_out_of_range, "alpha must sit in [0,1)");
  switch (kind) {
    case Kind::beta:
      if (alpha == 0.0) return 1.0;
      return beta_restricted(alpha, 1.0, a, b, 0.0);
    case Kind::atoms: {
      double s = 0.0;
      for (std::size_t i = 0; i < atom_p.size(); ++i)
        if (atom_p[i] > alpha) s += atom_w[i];
      return s;
    }
    case Kind::histogram: {
      const double h = 1.0 / static_cast<double>(hist_heights.size());
      double s = 0.0;
      for (std::size_t j = 0; j < hist_heights.size(); ++j) {
        const double lo = static_cast<double>(j) * h;
        const double hi = lo + h;
        if (hi <= alpha) continue;
        s += hist_heights[j] * (hi - std::max(lo, alpha));
      }
      return s;
    }
  }
  return 0.0;
}

double FSpec::integral_p(double alpha) const {
  switch (kind) {
    case Kind::beta:
      // E(P; P>alpha) = a/(a+b) * P(Beta(a+1,b) > alpha)
      return a / (a + b) * (alpha == 0.0 ? 1.0 : beta_restricted(alpha, 1.0, a + 1.0, b, 0.0));
    case Kind::atoms: {
      double s = 0.0;
      for (std::size_t i = 0; i < atom_p.size(); ++i)
        if (atom_p[i] > alpha) s += atom_w[i] * atom_p[i];
      return s;
    }
    case Kind::histogram: {
      const double h = 1.0 / static_cast<double>(hist_heights.size());
      double s = 0.0;
      for (std::size_t j = 0; j < hist_heights.size(); ++j) {
        const double lo = std::max(static_cast<double>(j) * h, alpha);
        const double hi = static_cast<double>(j + 1) * h;
        if (hi <= lo) continue;
        s += hist_heights[j] * 0.5 * (hi * hi - lo * lo);
      }
      return s;
    }
  }
  return 0.0;
}

bool FSpec::inv_p_diverges(double alpha) const {
  if (alpha > 0.0) return false;
  switch (kind) {
    case Kind::beta:
      return a <= 1.0;  // int p^(a-2) near 0 diverges iff a <= 1
    case Kind::atoms:
      return false;
    case Kind::histogram:
      return hist_heights.front() > 0.0;  // positive density touching p = 0
  }
  return false;
}

double FSpec::integral_inv_p(double alpha) const {
  if (inv_p_diverges(alpha)) return std::numeric_limits<double>::infinity();
  switch (kind) {
    case Kind::beta: {
      if (alpha == 0.0 && a > 1.0) {
        // closed form: E(1/P) = (a+b-1)/(a-1)
        return (a + b - 1.0) / (a - 1.0);
      }
      return beta_restricted(std::max(alpha, kLowerCut), 1.0, a, b, -1.0);
    }
    case Kind::atoms: {
      double s = 0.0;
      for (std::size_t i = 0; i < atom_p.size(); ++i)
        if (atom_p[i] > alpha) s += atom_w[i] / atom_p[i];
      return s;
    }
    case Kind::histogram: {
      const double h = 1.0 / static_cast<double>(hist_heights.size());
      double s = 0.0;
      for (std::size_t j = 0; j < hist_heights.size(); ++j) {
        const double lo = std::max({static_cast<double>(j) * h, alpha, kLowerCut});
        const double hi = static_cast<double>(j + 1) * h;
        if (hi <= lo) continue;
        s += hist_heights[j] * std::log(hi / lo);
      }
      return s;
    }
  }
  return 0.0;
}

std::string FSpec::describe() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::beta:
      out << "beta(" << a << "," << b << ")";
      break;
    case Kind::atoms:
      out << "atoms(k=" << atom_p.size() << ")";
      break;
    case Kind::histogram:
      out << "histogram(bins=" << hist_heights.size() << ")";
      break;
  }
  return out.str();
}

}  // namespace aobs
