#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "curebo/error.hpp"
#include "curebo/problems/cure_cycle.hpp"

namespace curebo::problems {

inline constexpr double kKelvinOffset = 273.15;

/// Two-branch phenomenological cure kinetics plus exotherm constants.
///
/// Defaults are literature values for Hercules 3501-6 resin (Lee, Loos and
/// Springer), not calibrated values of any particular study.
struct KineticParams {
  double A1 = 2.101e9;   // 1/min
  double A2 = -2.014e9;  // 1/min
  double A3 = 1.960e5;   // 1/min
  double dE1 = 8.07e4;   // J/mol
  double dE2 = 7.78e4;
  double dE3 = 5.66e4;
  double alpha_crit = 0.47;
  double branch_switch = 0.3;
  double gas_constant = 8.314;      // J/(mol K)
  double heat_of_reaction = 473.6e3;  // J/kg
  double fiber_volume_fraction = 0.6;
  double resin_density = 1270.0;  // kg/m^3

  void validate() const {
    if (!(dE1 > 0 && dE2 > 0 && dE3 > 0)) throw ValidationError("kinetics: activation energies must be positive");
    if (!(alpha_crit > branch_switch && alpha_crit <= 1.0)) {
      throw ValidationError("kinetics: alpha_crit must lie in (branch_switch, 1]");
    }
    if (!(fiber_volume_fraction >= 0.0 && fiber_volume_fraction < 1.0)) {
      throw ValidationError("kinetics: fiber volume fraction outside [0,1)");
    }
    if (!(gas_constant > 0.0)) throw ValidationError("kinetics: gas constant must be positive");
  }
};

enum class KnotMode { Fixed, Derived };

/// Modulus, shrinkage, viscosity, glass-transition and expansion constants.
struct MechanicalParams {
  double modulus_liquid = 3.45e6;  // Pa
  double modulus_cured = 3.45e9;   // Pa
  double gamma = 0.0;
  double alpha1 = 0.30;  // modulus development window
  double alpha2 = 0.90;
  double shrink_A = -0.0873;
  double shrink_total = -0.0873;  // volumetric, negative is contraction
  double alpha_c1 = 0.05;         // shrinkage window
  double alpha_c2 = 0.90;
  double cte = 57.6e-6;  // 1/K
  double ccs = 1.0;
  double gel_viscosity = 100.0;  // Pa s
  double mu_inf = 7.93e-14;      // Pa s
  double viscosity_U = 9.08e4;   // J/mol
  double viscosity_K = 14.1;
  double tg0 = 0.0;  // deg C
  double tg_inf = 215.0;
  double tg_lambda = 0.4;
  KnotMode knots = KnotMode::Derived;

  void validate() const {
    if (!(alpha1 >= 0.0 && alpha1 < alpha2 && alpha2 <= 1.0)) throw ValidationError("mechanics: need 0 <= alpha1 < alpha2 <= 1");
    if (!(alpha_c1 >= 0.0 && alpha_c1 < alpha_c2 && alpha_c2 <= 1.0)) {
      throw ValidationError("mechanics: need 0 <= alpha_c1 < alpha_c2 <= 1");
    }
    if (!(modulus_liquid < modulus_cured)) throw ValidationError("mechanics: liquid modulus must be below cured modulus");
    if (!(gamma >= -1.0 && gamma <= 1.0)) throw ValidationError("mechanics: gamma outside [-1,1]");
    if (!(gel_viscosity > 0.0 && mu_inf > 0.0)) throw ValidationError("mechanics: viscosity constants must be positive");
    if (!(tg_lambda > 0.0 && tg_lambda <= 1.0)) throw ValidationError("mechanics: tg_lambda outside (0,1]");
  }
};

/// Cure rate d(alpha)/dt in 1/min at temperature T (kelvin).
///
/// Arrhenius factors use exp(-dE/(R T)). At low temperature the first branch
/// can turn negative because A2 < 0; the rate is floored at zero.
inline double cure_rate_on_branch(double alpha, double T_kelvin, const KineticParams& k, bool first_branch) {
  const double a = std::clamp(alpha, 0.0, 1.0);
  const double rt = k.gas_constant * T_kelvin;
  double rate;
  if (first_branch) {
    const double b1 = k.A1 * std::exp(-k.dE1 / rt);
    const double b2 = k.A2 * std::exp(-k.dE2 / rt);
    rate = (b1 + a * b2) * (1.0 - a) * (k.alpha_crit - a);
  } else {
    rate = k.A3 * std::exp(-k.dE3 / rt) * (1.0 - a);
  }
  return std::max(rate, 0.0);
}

inline double cure_rate(double alpha, double T_kelvin, const KineticParams& k) {
  return cure_rate_on_branch(alpha, T_kelvin, k, std::clamp(alpha, 0.0, 1.0) <= k.branch_switch);
}

/// Resin heat generation rate in W/m^3 for a cure rate in 1/min.
inline double heat_generation(double dalpha_dt, const KineticParams& k) {
  return dalpha_dt / 60.0 * (1.0 - k.fiber_volume_fraction) * k.resin_density * k.heat_of_reaction;
}

/// Resin viscosity in Pa s at temperature T (kelvin).
inline double viscosity(double alpha, double T_kelvin, const MechanicalParams& m, const KineticParams& k) {
  return m.mu_inf * std::exp(m.viscosity_U / (k.gas_constant * T_kelvin) + m.viscosity_K * alpha);
}

/// DiBenedetto glass-transition temperature, deg C.
inline double glass_transition(double alpha, const MechanicalParams& m) {
  return m.tg0 + (m.tg_inf - m.tg0) * m.tg_lambda * alpha / (1.0 - (1.0 - m.tg_lambda) * alpha);
}

/// CHILE(alpha) resin modulus between knots alpha1 < alpha2.
inline double chile_modulus(double alpha, double alpha1, double alpha2, const MechanicalParams& m) {
  if (alpha <= alpha1) return m.modulus_liquid;
  if (alpha > alpha2) return m.modulus_cured;
  const double am = (alpha - alpha1) / (alpha2 - alpha1);
  return (1.0 - am) * m.modulus_liquid + am * m.modulus_cured +
         m.gamma * am * (1.0 - am) * (m.modulus_cured - m.modulus_liquid);
}

/// Volumetric cure shrinkage between knots alpha_c1 < alpha_c2.
inline double volumetric_shrinkage(double alpha, double alpha_c1, double alpha_c2, const MechanicalParams& m) {
  if (alpha <= alpha_c1) return 0.0;
  if (alpha >= alpha_c2) return m.shrink_total;
  const double as = (alpha - alpha_c1) / (alpha_c2 - alpha_c1);
  return m.shrink_A * as + (m.shrink_total - m.shrink_A) * as * as;
}

inline double shrinkage_strain(double volumetric) { return std::cbrt(1.0 + volumetric) - 1.0; }

struct SimulationSettings {
  double dt = 0.1;  // min
  double initial_alpha = 0.0;
};

/// Sampled cure history of a prescribed-temperature simulation.
struct CureTrace {
  std::vector<double> time;  // min
  std::vector<double> temperature;  // deg C
  std::vector<double> alpha;
  std::vector<double> dalpha_dt;  // 1/min
  std::vector<double> q_dot;      // W/m^3
  std::vector<double> mu;         // Pa s
  std::vector<double> tg;         // deg C
  std::vector<double> modulus;    // Pa
  std::vector<double> shrink_volumetric;
  std::vector<double> shrink_strain;
  std::vector<double> sigma_bar;  // Pa

  std::optional<std::size_t> gel_index;
  std::optional<std::size_t> vitrification_index;
  std::size_t viscosity_min_index = 0;
  double alpha1 = 0.0, alpha2 = 0.0, alpha_c1 = 0.0, alpha_c2 = 0.0;  // knots in effect

  double final_doc = 0.0;
  double u_proxy = 0.0;

  [[nodiscard]] std::size_t size() const noexcept { return time.size(); }
};

/// Integrate the kinetics along a cure cycle (RK4, fixed step) and derive
/// viscosity, T_g, modulus, shrinkage and the scalar residual measure.
///
/// Gelation is the first sample where viscosity rises through the gel
/// threshold while the part is not cooling; vitrification is the first
/// sample with T_g >= T. From gelation on, the fully constrained residual
/// measure accumulates E_r(alpha) * (CTE dT + CCS d eps_s); the deformation
/// proxy is |sigma_bar(t_end)| / E_r_cured.
inline CureTrace simulate_cure(const CureCycle& cycle, const KineticParams& kin, const MechanicalParams& mech,
                               const SimulationSettings& settings = {}) {
  if (!(settings.dt > 0.0)) throw DomainError("simulate_cure: dt must be positive");
  kin.validate();
  mech.validate();

  CureTrace tr;
  const double t_end = cycle.end_time();
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / settings.dt - 1e-9));
  tr.time.reserve(steps + 1);
  tr.alpha.reserve(steps + 1);

  // The branch is fixed by the state at the start of each sub-step; stages
  // never switch mid-step.
  auto rk4 = [&](double t0, double a0, double h) {
    const bool first = a0 <= kin.branch_switch;
    auto rate_at = [&](double t, double a) {
      return cure_rate_on_branch(a, cycle.temperature(t) + kKelvinOffset, kin, first);
    };
    const double k1 = rate_at(t0, a0);
    const double k2 = rate_at(t0 + 0.5 * h, a0 + 0.5 * h * k1);
    const double k3 = rate_at(t0 + 0.5 * h, a0 + 0.5 * h * k2);
    const double k4 = rate_at(t0 + h, a0 + h * k3);
    return a0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  // One output step, split at cycle vertices and where alpha crosses the
  // branch switch, so RK4 never straddles a kink or a jump in the rate.
  const auto& vertices = cycle.vertices();
  auto advance = [&](double t0, double a0, double t1) {
    std::vector<double> cuts{t0};
    for (const auto& v : vertices) {
      if (v.time > t0 && v.time < t1) cuts.push_back(v.time);
    }
    cuts.push_back(t1);
    double a1 = a0;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
      const double ta = cuts[i - 1], tb = cuts[i];
      double next = rk4(ta, a1, tb - ta);
      if (a1 <= kin.branch_switch && next > kin.branch_switch) {
        double lo = 0.0, hi = tb - ta;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          (rk4(ta, a1, mid) > kin.branch_switch ? hi : lo) = mid;
        }
        const double crossed = std::max(rk4(ta, a1, hi), std::nextafter(kin.branch_switch, 2.0));
        next = tb - ta - hi > 0.0 ? rk4(ta + hi, crossed, tb - ta - hi) : crossed;
      }
      a1 = next;
    }
    return a1;
  };

  double t = 0.0;
  double a = settings.initial_alpha;
  tr.time.push_back(t);
  tr.alpha.push_back(a);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t_next = k == steps ? t_end : static_cast<double>(k) * settings.dt;
    double next = advance(t, a, t_next);
    if (std::isnan(next)) {
      throw NumericalError("simulate_cure: NaN degree of cure at step " + std::to_string(k) + " (t = " +
                           std::to_string(t_next) + " min)");
    }
    if (next > 1.0 + 1e-9 || next < -1e-9) {
      throw NumericalError("simulate_cure: degree of cure " + std::to_string(next) + " left [0,1] at step " +
                           std::to_string(k) + " (t = " + std::to_string(t_next) + " min)");
    }
    next = std::clamp(next, 0.0, 1.0);
    t = t_next;
    a = next;
    tr.time.push_back(t);
    tr.alpha.push_back(a);
  }

  const std::size_t n = tr.time.size();
  tr.temperature.resize(n);
  tr.dalpha_dt.resize(n);
  tr.q_dot.resize(n);
  tr.mu.resize(n);
  tr.tg.resize(n);
  bool seen_below_gel = false;
  for (std::size_t k = 0; k < n; ++k) {
    const double T = cycle.temperature(tr.time[k]);
    const double TK = T + kKelvinOffset;
    tr.temperature[k] = T;
    tr.dalpha_dt[k] = cure_rate(tr.alpha[k], TK, kin);
    tr.q_dot[k] = heat_generation(tr.dalpha_dt[k], kin);
    tr.mu[k] = viscosity(tr.alpha[k], TK, mech, kin);
    tr.tg[k] = glass_transition(tr.alpha[k], mech);
    if (tr.mu[k] < tr.mu[tr.viscosity_min_index]) tr.viscosity_min_index = k;
    if (!tr.gel_index) {
      const bool cooling = k > 0 && T < tr.temperature[k - 1];
      if (tr.mu[k] >= mech.gel_viscosity && seen_below_gel && !cooling) tr.gel_index = k;
      if (tr.mu[k] < mech.gel_viscosity) seen_below_gel = true;
    }
    if (!tr.vitrification_index && tr.tg[k] >= T) tr.vitrification_index = k;
  }

  tr.alpha1 = mech.alpha1;
  tr.alpha2 = mech.alpha2;
  tr.alpha_c1 = mech.alpha_c1;
  tr.alpha_c2 = mech.alpha_c2;
  if (mech.knots == KnotMode::Derived) {
    // gel -> vitrification for modulus, viscosity minimum -> vitrification for shrinkage
    if (tr.vitrification_index) {
      const double av = tr.alpha[*tr.vitrification_index];
      if (tr.gel_index && tr.alpha[*tr.gel_index] < av) {
        tr.alpha1 = tr.alpha[*tr.gel_index];
        tr.alpha2 = av;
      }
      if (tr.alpha[tr.viscosity_min_index] < av) {
        tr.alpha_c1 = tr.alpha[tr.viscosity_min_index];
        tr.alpha_c2 = av;
      }
    }
  }

  tr.modulus.resize(n);
  tr.shrink_volumetric.resize(n);
  tr.shrink_strain.resize(n);
  tr.sigma_bar.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    tr.modulus[k] = chile_modulus(tr.alpha[k], tr.alpha1, tr.alpha2, mech);
    tr.shrink_volumetric[k] = volumetric_shrinkage(tr.alpha[k], tr.alpha_c1, tr.alpha_c2, mech);
    tr.shrink_strain[k] = shrinkage_strain(tr.shrink_volumetric[k]);
    if (k == 0) continue;
    double s = tr.sigma_bar[k - 1];
    if (tr.gel_index && k >= *tr.gel_index) {
      const double d_thermal = mech.cte * (tr.temperature[k] - tr.temperature[k - 1]);
      const double d_shrink = mech.ccs * (tr.shrink_strain[k] - tr.shrink_strain[k - 1]);
      s += tr.modulus[k] * (d_thermal + d_shrink);
    }
    tr.sigma_bar[k] = s;
  }

  tr.final_doc = tr.alpha.back();
  tr.u_proxy = std::abs(tr.sigma_bar.back()) / mech.modulus_cured;
  return tr;
}

inline const char* kTraceCsvHeader = "time_min,T_C,alpha,dalpha_dt,Q_dot,mu,Tg_C,Er,Vrs,eps_s,sigma_bar";

/// CSV export with a fixed column order.
inline void write_trace_csv(std::ostream& os, const CureTrace& tr) {
  os << kTraceCsvHeader << '\n';
  const auto old = os.precision(12);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    os << tr.time[k] << ',' << tr.temperature[k] << ',' << tr.alpha[k] << ',' << tr.dalpha_dt[k] << ','
       << tr.q_dot[k] << ',' << tr.mu[k] << ',' << tr.tg[k] << ',' << tr.modulus[k] << ','
       << tr.shrink_volumetric[k] << ',' << tr.shrink_strain[k] << ',' << tr.sigma_bar[k] << '\n';
  }
  os.precision(old);
}

}  // namespace curebo::problems
