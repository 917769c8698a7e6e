#include "eldiff/mms.hpp"

namespace eldiff::mms {

Jet Jet::variable(int index, double value) {
  Jet j(value);
  j.grad_[index] = 1.0;
  return j;
}

double Jet::laplacian(int dim) const {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += hess_[i][i];
  return s;
}

Jet& Jet::operator+=(const Jet& o) {
  value_ += o.value_;
  for (int i = 0; i < kVars; ++i) {
    grad_[i] += o.grad_[i];
    for (int j = 0; j < kVars; ++j) hess_[i][j] += o.hess_[i][j];
  }
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  value_ -= o.value_;
  for (int i = 0; i < kVars; ++i) {
    grad_[i] -= o.grad_[i];
    for (int j = 0; j < kVars; ++j) hess_[i][j] -= o.hess_[i][j];
  }
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  const Jet a = *this;
  value_ = a.value_ * o.value_;
  for (int i = 0; i < kVars; ++i) {
    grad_[i] = a.value_ * o.grad_[i] + o.value_ * a.grad_[i];
    for (int j = 0; j < kVars; ++j) {
      hess_[i][j] = a.value_ * o.hess_[i][j] + o.value_ * a.hess_[i][j] + a.grad_[i] * o.grad_[j] +
                    o.grad_[i] * a.grad_[j];
    }
  }
  return *this;
}

Jet operator-(const Jet& a) { return Jet(0.0) - a; }

Jet Jet::chain(const Jet& a, double f, double df, double d2f) {
  Jet out(f);
  for (int i = 0; i < kVars; ++i) {
    out.grad_[i] = df * a.grad_[i];
    for (int j = 0; j < kVars; ++j) out.hess_[i][j] = df * a.hess_[i][j] + d2f * a.grad_[i] * a.grad_[j];
  }
  return out;
}

Jet sin(const Jet& a) {
  const double s = std::sin(a.value_), c = std::cos(a.value_);
  return Jet::chain(a, s, c, -s);
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value_), c = std::cos(a.value_);
  return Jet::chain(a, c, -s, -c);
}

Jet exp(const Jet& a) {
  const double e = std::exp(a.value_);
  return Jet::chain(a, e, e, e);
}

namespace {

Vars point_vars(const Grid& g, std::size_t flat, double t) {
  const auto x = g.coordinates(flat);
  return {Jet::variable(0, x[0]), Jet::variable(1, x[1]), Jet::variable(2, x[2]),
          Jet::variable(3, t)};
}

std::vector<ScalarField> to_fields(const GridPtr& grid, std::vector<std::vector<double>>& values) {
  std::vector<ScalarField> out;
  out.reserve(values.size());
  for (auto& v : values) out.push_back(ScalarField::from_physical(grid, std::move(v)));
  return out;
}

VectorField to_vector(std::vector<ScalarField>& fields, std::size_t first, int dim) {
  std::vector<ScalarField> comps(fields.begin() + first, fields.begin() + first + dim);
  return VectorField(std::move(comps));
}

}  // namespace

ScalarField sample(const GridPtr& grid, const JetFn& fn, double t) {
  std::vector<double> values(grid->size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = fn(point_vars(*grid, i, t)).value();
  return ScalarField::from_physical(grid, std::move(values));
}

ScalarField npns_doping(const GridPtr& grid, const NpnsSolution& sol) { return sample(grid, sol.doping, 0.0); }

NpnsState npns_exact(const GridPtr& grid, const NpnsSolution& sol, const Params& params, double t) {
  const double l2 = params.lambda * params.lambda;
  NpnsState s;
  s.t = t;
  s.n = sample(grid, sol.n, t);
  s.p = s.n - sample(grid, sol.doping, t) - l2 * sample(grid, sol.lap_phi, t);
  std::vector<ScalarField> v;
  for (int i = 0; i < grid->dim(); ++i) v.push_back(sample(grid, sol.v[i], t));
  s.v = VectorField(std::move(v));
  return s;
}

NpnsForcing npns_forcing(const GridPtr& grid, const NpnsSolution& sol, const Params& params) {
  return [grid, sol, params](double t) {
    const int dim = grid->dim();
    const double l2 = params.lambda * params.lambda;
    const std::size_t size = grid->size();
    // 0: n, 1: p, 2..: v components
    std::vector<std::vector<double>> out(2 + dim, std::vector<double>(size));
    for (std::size_t k = 0; k < size; ++k) {
      const Vars x = point_vars(*grid, k, t);
      const Jet n = sol.n(x);
      const Jet phi = sol.phi(x);
      const Jet lap_phi = sol.lap_phi(x);
      const Jet p = n - sol.doping(x) - l2 * lap_phi;
      std::array<Jet, 3> v;
      for (int i = 0; i < dim; ++i) v[i] = sol.v[i](x);

      double n_drift = 0.0, p_drift = 0.0, n_adv = 0.0, p_adv = 0.0;
      for (int j = 0; j < dim; ++j) {
        n_drift += n.d(j) * phi.d(j);
        p_drift += p.d(j) * phi.d(j);
        n_adv += n.d(j) * v[j].value();
        p_adv += p.d(j) * v[j].value();
      }
      const double lp = lap_phi.value();
      out[0][k] = n.dt() - n.laplacian(dim) + n_drift + n.value() * lp + n_adv;
      out[1][k] = p.dt() - p.laplacian(dim) - p_drift - p.value() * lp + p_adv;
      const double charge = n.value() - p.value();
      for (int i = 0; i < dim; ++i) {
        double adv = 0.0;
        for (int j = 0; j < dim; ++j) adv += v[j].value() * v[i].d(j);
        out[2 + i][k] = v[i].dt() - params.mu * v[i].laplacian(dim) + adv - charge * phi.d(i);
      }
    }
    auto fields = to_fields(grid, out);
    return NpnsTendency{fields[0], fields[1], to_vector(fields, 2, dim)};
  };
}

ScalarField limit_doping(const GridPtr& grid, const LimitSolution& sol) { return sample(grid, sol.doping, 0.0); }

LimitState limit_exact(const GridPtr& grid, const LimitSolution& sol, int dim, double t) {
  LimitState s;
  s.t = t;
  s.z = sample(grid, sol.z, t);
  std::vector<ScalarField> v;
  for (int i = 0; i < dim; ++i) v.push_back(sample(grid, sol.v[i], t));
  s.v = VectorField(std::move(v));
  return s;
}

LimitForcingFn limit_forcing(const GridPtr& grid, const LimitSolution& sol, const Params& params) {
  return [grid, sol, params](double t) {
    const int dim = grid->dim();
    const std::size_t size = grid->size();
    // 0: z, 1: elliptic source, 2..: v components
    std::vector<std::vector<double>> out(2 + dim, std::vector<double>(size));
    for (std::size_t k = 0; k < size; ++k) {
      const Vars x = point_vars(*grid, k, t);
      const Jet z = sol.z(x);
      const Jet phi = sol.phi(x);
      const Jet d = sol.doping(x);
      std::array<Jet, 3> v;
      for (int i = 0; i < dim; ++i) v[i] = sol.v[i](x);

      double d_drift = 0.0, z_drift = 0.0, z_adv = 0.0, d_adv = 0.0;
      for (int j = 0; j < dim; ++j) {
        d_drift += d.d(j) * phi.d(j);
        z_drift += z.d(j) * phi.d(j);
        z_adv += z.d(j) * v[j].value();
        d_adv += d.d(j) * v[j].value();
      }
      const double lp = phi.laplacian(dim);
      out[0][k] = z.dt() - z.laplacian(dim) + d_drift + d.value() * lp + z_adv;
      out[1][k] = z_drift + z.value() * lp - d.laplacian(dim) + d_adv;
      for (int i = 0; i < dim; ++i) {
        double adv = 0.0;
        for (int j = 0; j < dim; ++j) adv += v[j].value() * v[i].d(j);
        out[2 + i][k] = v[i].dt() - params.mu * v[i].laplacian(dim) + adv - d.value() * phi.d(i);
      }
    }
    auto fields = to_fields(grid, out);
    return LimitForcing{fields[0], to_vector(fields, 2, dim), fields[1]};
  };
}

namespace {

std::array<JetFn, 3> temporal_velocity() {
  return {[](const Vars& x) { return 0.2 * cos(x[3]) * sin(x[1]); },
          [](const Vars& x) { return 0.15 * sin(x[3] + 1.0) * cos(x[0]); },
          [](const Vars& x) { return 0.1 * cos(x[3]) * sin(x[0] + x[1]); }};
}

std::array<JetFn, 3> spatial_velocity() {
  return {[](const Vars& x) { return 0.1 * sin(x[1]) * exp(0.5 * cos(x[1])); },
          [](const Vars& x) { return 0.1 * sin(x[0]) * exp(0.5 * cos(x[0])); },
          [](const Vars& x) { return 0.1 * sin(x[0] + x[1]); }};
}

Jet temporal_phi(const Vars& x) {
  return 0.1 * cos(x[3]) * cos(x[0]) * cos(x[1]) + 0.05 * exp(-x[3]) * sin(2.0 * x[1]);
}

Jet trig_doping(const Vars& x) { return 0.1 * (cos(x[0]) + cos(x[1])); }

}  // namespace

NpnsSolution npns_temporal() {
  NpnsSolution s;
  s.n = [](const Vars& x) {
    return 1.5 + 0.2 * cos(x[3]) * cos(x[0]) + 0.1 * sin(x[3]) * sin(x[0] + x[1]);
  };
  s.phi = temporal_phi;
  s.lap_phi = [](const Vars& x) {
    return -0.2 * cos(x[3]) * cos(x[0]) * cos(x[1]) - 0.2 * exp(-x[3]) * sin(2.0 * x[1]);
  };
  s.doping = trig_doping;
  s.v = temporal_velocity();
  return s;
}

LimitSolution limit_temporal() {
  LimitSolution s;
  s.z = [](const Vars& x) {
    return 2.0 + 0.2 * cos(x[3]) * cos(x[0]) + 0.1 * sin(x[3]) * sin(x[0] + x[1]);
  };
  s.phi = temporal_phi;
  s.doping = trig_doping;
  s.v = temporal_velocity();
  return s;
}

NpnsSolution npns_spatial() {
  NpnsSolution s;
  s.n = [](const Vars& x) { return 2.0 + 0.2 * exp(0.5 * sin(x[0])) * cos(x[1]); };
  s.phi = [](const Vars& x) { return 0.1 * cos(x[0]) * cos(x[1]) + 0.05 * sin(2.0 * x[1]); };
  s.lap_phi = [](const Vars& x) { return -0.2 * cos(x[0]) * cos(x[1]) - 0.2 * sin(2.0 * x[1]); };
  s.doping = [](const Vars& x) { return 0.1 * cos(x[0]) * exp(0.4 * sin(x[1])); };
  s.v = spatial_velocity();
  return s;
}

LimitSolution limit_spatial() {
  LimitSolution s;
  s.z = [](const Vars& x) { return 2.0 + 0.2 * exp(0.5 * sin(x[0])) * cos(x[1]); };
  s.phi = [](const Vars& x) { return 0.1 * exp(0.5 * cos(x[0])) * sin(x[1]); };
  s.doping = [](const Vars& x) { return 0.1 * cos(x[0]) * exp(0.4 * sin(x[1])); };
  s.v = spatial_velocity();
  return s;
}

NpnsSolution npns_constant(double c) {
  NpnsSolution s;
  s.n = [c](const Vars&) { return Jet(c); };
  s.phi = [](const Vars&) { return Jet(0.0); };
  s.lap_phi = s.phi;
  s.doping = s.phi;
  s.v = {s.phi, s.phi, s.phi};
  return s;
}

}  // namespace eldiff::mms
