#pragma once

#include <stdexcept>
#include <string>

#include "dg.hpp"

namespace ebdg {

enum class Scheme { forward_euler, ssprk33, rk4_classic };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::forward_euler: return "forward_euler";
    case Scheme::ssprk33: return "ssprk33";
    case Scheme::rk4_classic: return "rk4_classic";
  }
  return "?";
}

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "forward_euler" || s == "euler") return Scheme::forward_euler;
  if (s == "ssprk33" || s == "ssp3") return Scheme::ssprk33;
  if (s == "rk4_classic" || s == "rk4") return Scheme::rk4_classic;
  throw std::invalid_argument("unknown time scheme '" + s + "'");
}

inline int num_stages(Scheme s) {
  switch (s) {
    case Scheme::forward_euler: return 1;
    case Scheme::ssprk33: return 3;
    case Scheme::rk4_classic: return 4;
  }
  return 0;
}

/// out = a x + b y
inline void lincomb(double& out, double a, const double& x, double b, const double& y) { out = a * x + b * y; }

template <int Dim>
void lincomb(DgSolution<Dim>& out, double a, const DgSolution<Dim>& x, double b, const DgSolution<Dim>& y) {
  out.coeffs.resize(x.coeffs.size());
  for (std::size_t i = 0; i < x.coeffs.size(); ++i) out.coeffs[i] = a * x.coeffs[i] + b * y.coeffs[i];
}

/// Raised when a stage fails; carries the stage index.
class StageError : public std::runtime_error {
 public:
  StageError(int stage, const std::string& what)
      : std::runtime_error("stage " + std::to_string(stage) + ": " + what), stage_(stage) {}
  int stage() const { return stage_; }

 private:
  int stage_;
};

/// One explicit step. rhs(u, t, out) writes du/dt; limit(u, stage) post-processes each
/// stage value in place (stage counts from 1; the last stage is the new solution).
template <class S, class Rhs, class Limit>
void advance(S& u, double t, double dt, Scheme scheme, Rhs&& rhs, Limit&& limit) {
  auto guard = [](int stage, auto&& fn) {
    try {
      fn();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
  };
  switch (scheme) {
    case Scheme::forward_euler: {
      S k;
      guard(1, [&] {
        rhs(u, t, k);
        lincomb(u, 1.0, u, dt, k);
        limit(u, 1);
      });
      return;
    }
    case Scheme::ssprk33: {
      // Shu-Osher form: every stage is a convex combination of forward-Euler sub-steps.
      S k, u1, u2;
      guard(1, [&] {
        rhs(u, t, k);
        lincomb(u1, 1.0, u, dt, k);
        limit(u1, 1);
      });
      guard(2, [&] {
        rhs(u1, t + dt, k);
        lincomb(u2, 1.0, u1, dt, k);
        lincomb(u2, 0.75, u, 0.25, u2);
        limit(u2, 2);
      });
      guard(3, [&] {
        rhs(u2, t + 0.5 * dt, k);
        lincomb(u1, 1.0, u2, dt, k);
        lincomb(u, 1.0 / 3.0, u, 2.0 / 3.0, u1);
        limit(u, 3);
      });
      return;
    }
    case Scheme::rk4_classic: {
      S k, acc, stage;
      guard(1, [&] {
        rhs(u, t, k);
        lincomb(acc, 1.0, u, dt / 6.0, k);
        lincomb(stage, 1.0, u, 0.5 * dt, k);
        limit(stage, 1);
      });
      guard(2, [&] {
        rhs(stage, t + 0.5 * dt, k);
        lincomb(acc, 1.0, acc, dt / 3.0, k);
        lincomb(stage, 1.0, u, 0.5 * dt, k);
        limit(stage, 2);
      });
      guard(3, [&] {
        rhs(stage, t + 0.5 * dt, k);
        lincomb(acc, 1.0, acc, dt / 3.0, k);
        lincomb(stage, 1.0, u, dt, k);
        limit(stage, 3);
      });
      guard(4, [&] {
        rhs(stage, t + dt, k);
        lincomb(u, 1.0, acc, dt / 6.0, k);
        limit(u, 4);
      });
      return;
    }
  }
}

/// Unlimited step.
template <class S, class Rhs>
void advance(S& u, double t, double dt, Scheme scheme, Rhs&& rhs) {
  advance(u, t, dt, scheme, std::forward<Rhs>(rhs), [](S&, int) {});
}

}  // namespace ebdg
