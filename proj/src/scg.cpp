// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#include "prn/scg.hpp"

#include <cmath>
#include <stdexcept>

namespace prn {

namespace {

double checked(double v, const char* what) {
  if (!std::isfinite(v))
    throw std::runtime_error(std::string("scg: non-finite ") + what);
  return v;
}

const Eigen::VectorXd& checked(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite())
    throw std::runtime_error(std::string("scg: non-finite ") + what);
  return v;
}

}  // namespace

ScgResult scg_minimize(const ObjectiveFn& f, const GradientFn& g,
                       const Eigen::VectorXd& start, const ScgConfig& config) {
  ScgResult res;
  res.x = start;

  double fold = checked(f(start), "objective at start");
  double fnow = fold;
  Eigen::VectorXd gradnew = checked(g(start), "gradient at start");
  Eigen::VectorXd gradold = gradnew;
  Eigen::VectorXd direction = -gradnew;

  res.objective = fnow;
  res.trace.push_back(fnow);
  if (config.max_iterations < 1) {
    res.stop_reason = "max_iterations";
    return res;
  }

  double scale = config.initial_scale;  // the adaptive scale of Moller's method
  const double scale_min = 1e-15, scale_max = 1e100;
  const double sigma0 = 1e-4;
  const Eigen::Index n = start.size();

  bool success = true;
  int consecutive_small = 0;
  int nsuccess = 0;
  double mu = 0.0, kappa = 0.0, theta = 0.0;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    res.iterations = iter;
    if (success) {
      mu = direction.dot(gradnew);
      if (mu >= 0.0) {
        direction = -gradnew;
        mu = direction.dot(gradnew);
      }
      kappa = direction.squaredNorm();
      if (kappa < 1e-300) {
        // zero direction: already at a stationary point
        res.stop_reason = "stationary";
        res.trace.push_back(fnow);
        res.objective = fnow;
        return res;
      }
      const double sigma = sigma0 / std::sqrt(kappa);
      const Eigen::VectorXd gplus = checked(g(res.x + sigma * direction), "gradient");
      theta = direction.dot(gplus - gradnew) / sigma;
    }

    // Regularized curvature along the search direction.
    double delta = theta + scale * kappa;
    if (delta <= 0.0) {
      delta = scale * kappa;
      scale = scale - theta / kappa;
    }
    const double alpha = -mu / delta;

    const Eigen::VectorXd xnew = res.x + alpha * direction;
    const double fnew = checked(f(xnew), "objective");
    const double comparison = 2.0 * (fnew - fold) / (alpha * mu);

    if (comparison >= 0.0) {
      success = true;
      ++nsuccess;
      res.x = xnew;
      fnow = fnew;
    } else {
      success = false;
      fnow = fold;
    }
    res.trace.push_back(fnow);

    if (success) {
      const double change = std::abs(fnew - fold);
      if (change <= config.objective_tolerance * std::max(1.0, std::abs(fold)))
        ++consecutive_small;
      else
        consecutive_small = 0;

      fold = fnew;
      gradold = gradnew;
      gradnew = checked(g(res.x), "gradient");

      if (consecutive_small >= 2) {
        res.stop_reason = "objective_tolerance";
        res.objective = fnow;
        return res;
      }
      if (gradnew.norm() < config.gradient_tolerance) {
        res.stop_reason = "gradient_tolerance";
        res.objective = fnow;
        return res;
      }
    }

    if (comparison < 0.25) scale = std::min(4.0 * scale, scale_max);
    if (comparison > 0.75) scale = std::max(0.5 * scale, scale_min);

    if (nsuccess == n) {
      // restart with steepest descent after n successes
      direction = -gradnew;
      nsuccess = 0;
    } else if (success) {
      const double gamma = (gradold.squaredNorm() - gradnew.dot(gradold)) / mu;
      direction = gamma * direction - gradnew;
    }
  }

  res.stop_reason = "max_iterations";
  res.objective = fnow;
  return res;
}

}  // namespace prn
