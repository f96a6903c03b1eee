#pragma once

#include "ovfl/analysis.hpp"
#include "ovfl/energy.hpp"
#include "ovfl/model.hpp"
#include "ovfl/samples.hpp"

#include <optional>
#include <vector>

namespace ovfl {

// One point of the near-collision segment: the second gap psi = xi_2 as a
// function of its rate zeta = zeta_2, with the leading pair (xi_1, zeta_1)
// frozen at the same instant.
struct BarrierSample {
    double t = 0.0;
    double zeta = 0.0;
    double psi = 0.0;
    double xi1 = 0.0;
    double zeta1 = 0.0;
};

struct BarrierSegment {
    double t_check = 0.0;     // first time xi_2 drops to delta_2 / 2
    double zeta_check = 0.0;  // zeta_2 at t_check
    double delta_2 = 0.0;     // min{xi_2(0), delta_1}
    double delta_1 = 0.0;
    Delta1Source delta_1_source = Delta1Source::Unavailable;
    std::vector<BarrierSample> samples;  // zeta strictly increasing, all < 0
    double mu_plus = 0.0;                // last zeta of the segment
    double t_exit = 0.0;
    double barrier_bound = 0.0;                  // {(delta_2/2)^-1 + |zeta_check|/beta}^-1
    std::optional<double> barrier_bound_signed;  // same with the signed zeta_check, when positive
};

// Comparison curve R(u) = {(delta_2/2)^-1 + (u - zeta_check)/beta}^-1 on [zeta_check, 0).
// Throws DomainError outside that interval.
double barrier_R(double u, double delta_2, double beta, double zeta_check);

// Gap floor {(delta_2/2)^-1 + |zeta_check|/beta}^-1.
double barrier_lower_bound(double delta_2, double beta, double zeta_check);

// alpha {V(psi) - V(xi1)} + alpha zeta + beta (zeta/psi^2 - zeta1/xi1^2); equals -d(zeta_2)/dt.
double g_denominator(double zeta, double psi, double zeta1, double xi1, const ModelParams& p);

// Slope of the reconstructed gap, psi'(zeta) = -zeta / g_denominator(...).
// Throws SingularQuotientError when the denominator vanishes.
double g_field(double zeta, double psi, double zeta1, double xi1, const ModelParams& p);

// Segment after the first drop of xi_2 to delta_2 / 2 on which xi_2 <= delta_2 / 2
// and zeta_2 < 0. Returns nullopt if xi_2 never gets there. Requires N = 2.
// Throws MonotonicityViolation if zeta_2 decreases by more than 1e-9.
std::optional<BarrierSegment> extract_barrier_segment(const SampleTable& table, const EnergyBudget& budget,
                                                      const ModelParams& p);

// psi >= R pointwise and min psi >= barrier_lower_bound, both within 1e-6.
MonitorReport verify_barrier(const BarrierSegment& seg, double beta);

// d(zeta_2)/dt > -1e-9 on every segment sample.
MonitorReport verify_zeta2_increasing(const BarrierSegment& seg, const ModelParams& p);

// Once zeta_2 > 0 while xi_2 < delta_2 / 2, it stays >= -1e-8 for the rest of that stretch.
MonitorReport verify_zeta2_positive_invariance(const SampleTable& table, double delta_2, double t_check);

// Monotonicity-preserving piecewise cubic Hermite interpolant.
class MonotoneCubic {
public:
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double derivative(double x) const;
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

private:
    std::size_t interval(double x) const;

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> d_;
};

struct PsiDerivativeCheck {
    double max_relative_error = 0.0;
    double worst_zeta = 0.0;
    std::size_t checked = 0;
};

// Centred finite differences of the monotone-cubic reconstruction of psi
// against g_field at interior samples (skipping `trim` samples at each end).
PsiDerivativeCheck check_psi_derivative(const BarrierSegment& seg, const ModelParams& p, std::size_t trim = 1);

} // namespace ovfl
