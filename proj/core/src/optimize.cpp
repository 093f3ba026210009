/*
Copyright 2026 The volreg Authors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "volreg/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "volreg/error.hpp"
#include "volreg/warp.hpp"

namespace volreg {

std::string to_string(Engine e) {
  switch (e) {
    case Engine::Affine: return "affine";
    case Engine::Ffd: return "ffd";
    case Engine::DenseDiffeomorphic: return "dense-diffeomorphic";
    case Engine::DenseVoxelmorphEnergy: return "dense-voxelmorph-energy";
  }
  return "?";
}

Engine parse_engine(const std::string& name) {
  if (name == "affine") return Engine::Affine;
  if (name == "ffd") return Engine::Ffd;
  if (name == "dense-diffeomorphic" || name == "diffeomorphic") return Engine::DenseDiffeomorphic;
  if (name == "dense-voxelmorph-energy" || name == "voxelmorph-energy" || name == "voxelmorph") {
    return Engine::DenseVoxelmorphEnergy;
  }
  throw InvalidArgument("unknown engine '" + name +
                        "' (expected affine, ffd, dense-diffeomorphic or dense-voxelmorph-energy)");
}

std::string to_string(Optimizer o) { return o == Optimizer::Adam ? "adam" : "gradient-descent-with-backtracking"; }

Optimizer parse_optimizer(const std::string& name) {
  if (name == "adam") return Optimizer::Adam;
  if (name == "gradient-descent-with-backtracking" || name == "gradient-descent" || name == "gd") {
    return Optimizer::GradientDescent;
  }
  throw InvalidArgument("unknown optimizer '" + name + "' (expected gradient-descent-with-backtracking or adam)");
}

double default_step(Engine engine) {
  switch (engine) {
    case Engine::Affine: return 0.5;
    case Engine::Ffd: return 1.0;
    case Engine::DenseDiffeomorphic: return 0.5;
    case Engine::DenseVoxelmorphEnergy: return 0.25;
  }
  return 0.5;
}

double default_control_spacing(int scale_percent) { return scale_percent == 15 ? 12.0 : 8.0; }

RegistrationConfig RegistrationConfig::defaults_for(Engine engine) {
  RegistrationConfig cfg;
  cfg.engine = engine;
  switch (engine) {
    case Engine::Affine:
      cfg.objective = Objective::Msd;
      cfg.weights.bending = 0.0;
      cfg.weights.diffusion = 0.0;
      break;
    case Engine::Ffd:
      cfg.objective = Objective::Nmi;
      cfg.weights.diffusion = 0.0;
      break;
    case Engine::DenseDiffeomorphic:
      cfg.objective = Objective::LocalCc;
      cfg.weights.bending = 0.0;
      cfg.weights.diffusion = 0.0;
      break;
    case Engine::DenseVoxelmorphEnergy:
      cfg.objective = Objective::LocalCc;
      cfg.optimizer = Optimizer::Adam;
      cfg.weights.bending = 0.0;
      cfg.weights.diffusion = 1.0;
      break;
  }
  return cfg;
}

void RegistrationConfig::validate() const {
  if (levels < 1) throw InvalidArgument("levels must be >= 1");
  if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
  if (step < 0.0 || !std::isfinite(step)) throw InvalidArgument("step must be finite and >= 0");
  if (weights.diffusion < 0.0 || weights.bending < 0.0) throw InvalidArgument("regulariser weights must be >= 0");
  if (window < 3 || window % 2 == 0) throw InvalidArgument("local_cc window must be odd and >= 3");
  if (bins < 2) throw InvalidArgument("bins must be >= 2");
  if (!(control_spacing >= 2.0)) throw InvalidArgument("control_spacing must be >= 2 voxels");
  if (!(nmi_fd_step > 0.0)) throw InvalidArgument("nmi_fd_step must be > 0");
  if (update_sigma < 0.0) throw InvalidArgument("update_sigma must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0 && adam_epsilon > 0.0)) {
    throw InvalidArgument("adam parameters out of range");
  }
  const auto incompatible = [&] {
    return InvalidArgument("objective " + to_string(objective) + " is not supported by engine " + to_string(engine));
  };
  switch (engine) {
    case Engine::Affine:
      if (objective != Objective::Msd && objective != Objective::Cc) throw incompatible();
      break;
    case Engine::Ffd:
      if (objective == Objective::LocalCc) throw incompatible();
      break;
    case Engine::DenseDiffeomorphic:
    case Engine::DenseVoxelmorphEnergy:
      if (objective != Objective::Msd && objective != Objective::LocalCc) throw incompatible();
      break;
  }
}

std::vector<Dims> multires_schedule(Dims dims, int levels) {
  if (levels < 1) throw InvalidArgument("levels must be >= 1");
  if (!dims.positive()) throw InvalidArgument("schedule dims must be positive");
  std::vector<Dims> out;
  for (int l = 0; l < levels; ++l) {
    const double factor = std::ldexp(1.0, -(levels - 1 - l));
    out.push_back(l == levels - 1 ? dims
                                  : Dims{scaled_extent(dims.nx, factor), scaled_extent(dims.ny, factor),
                                         scaled_extent(dims.nz, factor)});
  }
  if (out.front().min_extent() < 8) {
    throw InvalidArgument("grid " + to_string(dims) + " is too small for " + std::to_string(levels) +
                          " levels (coarsest " + to_string(out.front()) + " is below 8 voxels)");
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Level {
  Dims dims;
  Volume3 fixed;
  Volume3 moving;
};

std::vector<Level> build_pyramid(const Volume3& fixed, const Volume3& moving, int levels) {
  std::vector<Level> out;
  for (const Dims& d : multires_schedule(fixed.dims(), levels)) {
    out.push_back({d, downscale_to(fixed, d), downscale_to(moving, d)});
  }
  return out;
}

double step_for(const RegistrationConfig& cfg) { return cfg.step > 0.0 ? cfg.step : default_step(cfg.engine); }

double mean_ratio(Dims level, Dims full) {
  return (static_cast<double>(level.nx) / full.nx + static_cast<double>(level.ny) / full.ny +
          static_cast<double>(level.nz) / full.nz) /
         3.0;
}

void check_inputs(const Volume3& fixed, const Volume3& moving, const RegistrationConfig& cfg, Engine expected) {
  require_same_dims(fixed.dims(), moving.dims(), "registration");
  if (cfg.engine != expected) {
    throw InvalidArgument("config engine " + to_string(cfg.engine) + " passed to the " + to_string(expected) +
                          " driver");
  }
  cfg.validate();
}

// Before/after metrics, identity fallback, and timing.
void finalize(RegistrationResult& r, const Volume3& fixed, const Volume3& moving, const RegistrationConfig& cfg,
              Clock::time_point start, bool require_positive_jacobian = false) {
  r.before = similarity_report(fixed, moving, cfg.bins);
  r.after = similarity_report(fixed, apply_displacement(moving, r.field), cfg.bins);
  bool degrade = r.after.cc < r.before.cc || !r.field.all_finite();
  if (!degrade && require_positive_jacobian && fixed.dims().min_extent() >= 3) {
    degrade = positive_jacobian_fraction(jacobian_determinant(r.field)) < 0.999;
  }
  if (degrade) {
    r.field = DisplacementField3(fixed.dims());
    r.after = r.before;
    r.fell_back = true;
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
}

template <class V>
double max_abs(const V& values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double max_vector_norm(const VectorField3& f) { return f.max_magnitude(); }

// a += s * b
void axpy(VectorField3& a, double s, const VectorField3& b) {
  for (int c = 0; c < 3; ++c) {
    auto ac = a.component(c);
    auto bc = b.component(c);
    for (std::size_t n = 0; n < ac.size(); ++n) ac[n] = static_cast<float>(ac[n] + s * bc[n]);
  }
}

// ---------------------------------------------------------------- affine

struct AffineParams {
  std::array<double, 9> M{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 t{0, 0, 0};
};

AffineTransform to_affine(const AffineParams& p, Dims d) {
  const Vec3 c{(d.nx - 1) / 2.0, (d.ny - 1) / 2.0, (d.nz - 1) / 2.0};
  AffineTransform a;
  for (int r = 0; r < 3; ++r) {
    double mc = 0.0;
    for (int k = 0; k < 3; ++k) {
      a.linear(r, k) = p.M[static_cast<std::size_t>(3 * r + k)];
      mc += p.M[static_cast<std::size_t>(3 * r + k)] * c[static_cast<std::size_t>(k)];
    }
    a.offset(r) = c[static_cast<std::size_t>(r)] + p.t[static_cast<std::size_t>(r)] - mc;
  }
  return a;
}

}  // namespace

RegistrationResult register_affine(const Volume3& fixed, const Volume3& moving, const RegistrationConfig& cfg) {
  const auto start = Clock::now();
  check_inputs(fixed, moving, cfg, Engine::Affine);
  const auto pyramid = build_pyramid(fixed, moving, cfg.levels);
  const double step = step_for(cfg);

  RegistrationResult result;
  AffineParams params;
  Dims prev = pyramid.front().dims;
  bool converged = false;
  for (const Level& level : pyramid) {
    const Dims d = level.dims;
    for (int a = 0; a < 3; ++a) params.t[static_cast<std::size_t>(a)] *= static_cast<double>(d[a]) / prev[a];
    prev = d;
    const Vec3 c{(d.nx - 1) / 2.0, (d.ny - 1) / 2.0, (d.nz - 1) / 2.0};
    const double radius = (d.nx + d.ny + d.nz) / 6.0;
    auto energy = [&](const AffineParams& p) {
      return dense_energy(level.fixed, apply_displacement(level.moving, affine_to_displacement(to_affine(p, d), d)),
                          cfg.objective);
    };

    LevelTrace trace;
    trace.dims = d;
    double e = energy(params);
    trace.objective.push_back(e);
    converged = false;
    for (int it = 0; it < cfg.iterations; ++it) {
      const auto u = affine_to_displacement(to_affine(params, d), d);
      const auto g = objective_gradient(level.fixed, level.moving, u, cfg.objective);
      std::array<double, 12> grad{};
      for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
          for (int i = 0; i < d.nx; ++i) {
            const std::size_t q = d.index(i, j, k);
            const double rel[3] = {i - c[0], j - c[1], k - c[2]};
            for (int r = 0; r < 3; ++r) {
              const double gr = g.component(r)[q];
              for (int b = 0; b < 3; ++b) grad[static_cast<std::size_t>(3 * r + b)] += gr * rel[b];
              grad[static_cast<std::size_t>(9 + r)] += gr;
            }
          }
      // Linear entries are measured by the displacement they cause at the
      // volume radius so that both blocks share voxel units.
      std::array<double, 12> dir{};
      for (int n = 0; n < 9; ++n) dir[static_cast<std::size_t>(n)] = -grad[static_cast<std::size_t>(n)] * radius;
      for (int n = 9; n < 12; ++n) dir[static_cast<std::size_t>(n)] = -grad[static_cast<std::size_t>(n)];
      const double norm = max_abs(dir);
      if (!(norm > 0.0)) {
        converged = true;
        break;
      }
      bool accepted = false;
      double alpha = step / norm;
      for (int halving = 0; halving <= 10; ++halving, alpha *= 0.5) {
        AffineParams trial = params;
        for (int n = 0; n < 9; ++n) trial.M[static_cast<std::size_t>(n)] += alpha * dir[static_cast<std::size_t>(n)] / radius;
        for (int n = 0; n < 3; ++n) trial.t[static_cast<std::size_t>(n)] += alpha * dir[static_cast<std::size_t>(9 + n)];
        const double et = energy(trial);
        if (et < e) {
          params = trial;
          e = et;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        converged = true;
        break;
      }
      trace.objective.push_back(e);
      ++trace.iterations;
    }
    trace.converged = converged;
    result.iterations_run += trace.iterations;
    result.traces.push_back(std::move(trace));
  }
  const AffineTransform final_affine = to_affine(params, fixed.dims());
  if (final_affine.near_singular()) {
    // Degenerate result: fall back to the identity transform.
    result.field = DisplacementField3(fixed.dims());
  } else {
    result.field = affine_to_displacement(final_affine, fixed.dims());
  }
  result.affine = final_affine;
  result.converged = converged;
  finalize(result, fixed, moving, cfg, start);
  if (result.fell_back) result.affine = AffineTransform::identity();
  return result;
}

// ------------------------------------------------------------------- ffd

namespace {

// Similarity score maximised by the FFD engine (before the bending penalty).
double ffd_score(const Level& level, const FfdGrid& g, const RegistrationConfig& cfg) {
  if (cfg.objective == Objective::Nmi || cfg.objective == Objective::Mi) {
    return ffd_similarity(level.fixed, level.moving, g, cfg.objective, cfg.bins);
  }
  const Volume3 warped = apply_displacement(level.moving, ffd_to_displacement(g, level.dims));
  return -dense_energy(level.fixed, warped, cfg.objective, cfg.window);
}

ControlVectors ffd_score_gradient(const Level& level, const FfdGrid& g, const RegistrationConfig& cfg) {
  if (cfg.objective == Objective::Nmi || cfg.objective == Objective::Mi) {
    const double h = cfg.nmi_fd_step / mean_ratio(level.dims, g.domain());
    return similarity_gradient_on_controls(level.fixed, level.moving, g, cfg.objective, h, cfg.bins);
  }
  const auto u = ffd_to_displacement(g, level.dims);
  auto d_energy = objective_gradient(level.fixed, level.moving, u, cfg.objective, cfg.window);
  d_energy *= -1.0;
  return ffd_adjoint(g, d_energy);
}

}  // namespace

RegistrationResult register_ffd(const Volume3& fixed, const Volume3& moving, const RegistrationConfig& cfg) {
  const auto start = Clock::now();
  check_inputs(fixed, moving, cfg, Engine::Ffd);
  const auto pyramid = build_pyramid(fixed, moving, cfg.levels);
  const double step = step_for(cfg);
  const double lambda = cfg.weights.bending;

  RegistrationResult result;
  FfdGrid grid(fixed.dims(), cfg.control_spacing);
  bool converged = false;
  for (const Level& level : pyramid) {
    const double ratio = mean_ratio(level.dims, fixed.dims());
    auto score = [&](const FfdGrid& g) {
      const double s = ffd_score(level, g, cfg);
      return lambda > 0.0 ? s - lambda * bending_energy(g).value : s;
    };
    LevelTrace trace;
    trace.dims = level.dims;
    double f = score(grid);
    trace.objective.push_back(f);
    converged = false;
    for (int it = 0; it < cfg.iterations; ++it) {
      ControlVectors grad = ffd_score_gradient(level, grid, cfg);
      if (lambda > 0.0) {
        const BendingEnergy be = bending_energy(grid);
        for (int c = 0; c < 3; ++c)
          for (std::size_t n = 0; n < grad[static_cast<std::size_t>(c)].size(); ++n)
            grad[static_cast<std::size_t>(c)][n] -= lambda * be.gradient[static_cast<std::size_t>(c)][n];
      }
      double norm = 0.0;
      for (const auto& c : grad) norm = std::max(norm, max_abs(c));
      if (!(norm > 0.0)) {
        converged = true;
        break;
      }
      bool accepted = false;
      // Largest coefficient update equals the step, in voxels of this level.
      double alpha = step / (ratio * norm);
      for (int halving = 0; halving <= 10; ++halving, alpha *= 0.5) {
        FfdGrid trial = grid;
        for (int c = 0; c < 3; ++c) {
          auto tc = trial.component(c);
          const auto& gc = grad[static_cast<std::size_t>(c)];
          for (std::size_t n = 0; n < tc.size(); ++n) tc[n] += alpha * gc[n];
        }
        const double ft = score(trial);
        if (ft > f) {
          grid = std::move(trial);
          f = ft;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        converged = true;
        break;
      }
      trace.objective.push_back(f);
      ++trace.iterations;
    }
    trace.converged = converged;
    result.iterations_run += trace.iterations;
    result.traces.push_back(std::move(trace));
  }
  result.field = ffd_to_displacement(grid, fixed.dims());
  result.ffd = grid;
  result.converged = converged;
  finalize(result, fixed, moving, cfg, start);
  return result;
}

// ---------------------------------------------------------- diffeomorphic

RegistrationResult register_dense_diffeomorphic(const Volume3& fixed, const Volume3& moving,
                                                const RegistrationConfig& cfg) {
  const auto start = Clock::now();
  check_inputs(fixed, moving, cfg, Engine::DenseDiffeomorphic);
  const auto pyramid = build_pyramid(fixed, moving, cfg.levels);
  const double step = step_for(cfg);
  const double lambda = cfg.weights.diffusion;

  RegistrationResult result;
  VelocityField3 velocity{VectorField3(pyramid.front().dims)};
  bool converged = false;
  for (const Level& level : pyramid) {
    velocity.v = resample_field(velocity.v, level.dims);
    auto energy = [&](const VelocityField3& v, DisplacementField3* u_out) {
      DisplacementField3 u = exp_velocity(v);
      double e = dense_energy(level.fixed, apply_displacement(level.moving, u), cfg.objective, cfg.window);
      if (lambda > 0.0) e += lambda * diffusion_energy(v.v).value;
      if (u_out) *u_out = std::move(u);
      return e;
    };
    LevelTrace trace;
    trace.dims = level.dims;
    DisplacementField3 u;
    double e = energy(velocity, &u);
    trace.objective.push_back(e);
    converged = false;
    for (int it = 0; it < cfg.iterations; ++it) {
      VectorField3 g = objective_gradient(level.fixed, level.moving, u, cfg.objective, cfg.window);
      if (lambda > 0.0) axpy(g, lambda, diffusion_energy(velocity.v).gradient);
      gaussian_smooth(g, cfg.update_sigma, EdgeMode::Renormalize);
      const double norm = max_vector_norm(g);
      if (!(norm > 0.0)) {
        converged = true;
        break;
      }
      bool accepted = false;
      double alpha = step / norm;
      for (int halving = 0; halving <= 10; ++halving, alpha *= 0.5) {
        VelocityField3 trial = velocity;
        axpy(trial.v, -alpha, g);
        DisplacementField3 ut;
        const double et = energy(trial, &ut);
        if (et < e) {
          velocity = std::move(trial);
          u = std::move(ut);
          e = et;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        converged = true;
        break;
      }
      trace.objective.push_back(e);
      ++trace.iterations;
    }
    trace.converged = converged;
    result.iterations_run += trace.iterations;
    result.traces.push_back(std::move(trace));
  }
  result.field = exp_velocity(velocity);
  result.velocity = velocity;
  result.converged = converged;
  finalize(result, fixed, moving, cfg, start, /*require_positive_jacobian=*/true);
  return result;
}

// ------------------------------------------------------ voxelmorph energy

RegistrationResult register_voxelmorph_energy(const Volume3& fixed, const Volume3& moving,
                                              const RegistrationConfig& cfg) {
  const auto start = Clock::now();
  check_inputs(fixed, moving, cfg, Engine::DenseVoxelmorphEnergy);
  const auto pyramid = build_pyramid(fixed, moving, cfg.levels);
  const double step = step_for(cfg);
  const double lambda = cfg.weights.diffusion;

  RegistrationResult result;
  DisplacementField3 u(pyramid.front().dims);
  bool converged = false;
  for (const Level& level : pyramid) {
    u = resample_field(u, level.dims);
    // E(u) = dissimilarity(fixed, warp(moving, u)) + lambda * diffusion(u)
    auto evaluate = [&](const DisplacementField3& field, VectorField3* grad) {
      const Volume3 warped = apply_displacement(level.moving, field);
      double e = dense_energy(level.fixed, warped, cfg.objective, cfg.window);
      DiffusionEnergy reg = diffusion_energy(field);
      e += lambda * reg.value;
      if (grad) {
        *grad = pull_back_gradient(level.moving, field,
                                   energy_gradient_wrt_warped(level.fixed, warped, cfg.objective, cfg.window));
        axpy(*grad, lambda, reg.gradient);
      }
      return e;
    };
    LevelTrace trace;
    trace.dims = level.dims;
    converged = false;
    VectorField3 g;
    double e = evaluate(u, &g);
    trace.objective.push_back(e);

    if (cfg.optimizer == Optimizer::Adam) {
      const std::size_t n = level.dims.voxels();
      std::array<std::vector<double>, 3> m1, m2;
      for (int c = 0; c < 3; ++c) {
        m1[static_cast<std::size_t>(c)].assign(n, 0.0);
        m2[static_cast<std::size_t>(c)].assign(n, 0.0);
      }
      // Updates that raise E are rejected and halve the learning rate; the
      // moment estimates keep the rejected gradient.
      double b1t = 1.0, b2t = 1.0;
      double lr = step;
      for (int it = 0; it < cfg.iterations; ++it) {
        b1t *= cfg.adam_beta1;
        b2t *= cfg.adam_beta2;
        DisplacementField3 trial = u;
        for (int c = 0; c < 3; ++c) {
          auto tc = trial.component(c);
          auto gc = g.component(c);
          auto& a = m1[static_cast<std::size_t>(c)];
          auto& b = m2[static_cast<std::size_t>(c)];
          for (std::size_t q = 0; q < n; ++q) {
            const double gq = gc[q];
            a[q] = cfg.adam_beta1 * a[q] + (1.0 - cfg.adam_beta1) * gq;
            b[q] = cfg.adam_beta2 * b[q] + (1.0 - cfg.adam_beta2) * gq * gq;
            const double mhat = a[q] / (1.0 - b1t);
            const double vhat = b[q] / (1.0 - b2t);
            tc[q] = static_cast<float>(tc[q] - lr * mhat / (std::sqrt(vhat) + cfg.adam_epsilon));
          }
        }
        ++trace.iterations;
        VectorField3 gt;
        const double et = evaluate(trial, &gt);
        if (!(et <= e)) {
          lr *= 0.5;
          if (lr < step / 1024.0) {
            converged = true;
            break;
          }
          continue;
        }
        const double prev = e;
        u = std::move(trial);
        g = std::move(gt);
        e = et;
        trace.objective.push_back(e);
        if (prev - e <= 1e-12 * std::max(1.0, std::abs(e))) {
          converged = true;
          break;
        }
      }
    } else {
      for (int it = 0; it < cfg.iterations; ++it) {
        const double norm = max_vector_norm(g);
        if (!(norm > 0.0)) {
          converged = true;
          break;
        }
        bool accepted = false;
        double alpha = step / norm;
        for (int halving = 0; halving <= 10; ++halving, alpha *= 0.5) {
          DisplacementField3 trial = u;
          axpy(trial, -alpha, g);
          VectorField3 gt;
          const double et = evaluate(trial, &gt);
          if (et < e) {
            u = std::move(trial);
            g = std::move(gt);
            e = et;
            accepted = true;
            break;
          }
        }
        if (!accepted) {
          converged = true;
          break;
        }
        trace.objective.push_back(e);
        ++trace.iterations;
      }
    }
    trace.converged = converged;
    result.iterations_run += trace.iterations;
    result.traces.push_back(std::move(trace));
  }
  result.field = std::move(u);
  result.converged = converged;
  finalize(result, fixed, moving, cfg, start);
  return result;
}

RegistrationResult register_pair(const Volume3& fixed, const Volume3& moving, const RegistrationConfig& cfg) {
  switch (cfg.engine) {
    case Engine::Affine: return register_affine(fixed, moving, cfg);
    case Engine::Ffd: return register_ffd(fixed, moving, cfg);
    case Engine::DenseDiffeomorphic: return register_dense_diffeomorphic(fixed, moving, cfg);
    case Engine::DenseVoxelmorphEnergy: return register_voxelmorph_energy(fixed, moving, cfg);
  }
  throw InvalidArgument("unknown engine");
}

}  // namespace volreg
