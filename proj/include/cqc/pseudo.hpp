#pragma once

#include "cqc/dataset.hpp"
#include "cqc/nuisance.hpp"

#include <cstddef>
#include <span>
#include <string_view>

namespace cqc {

enum class PseudoKind { dr, ipw, oracle_dr };

std::string_view to_string(PseudoKind kind) noexcept;
PseudoKind parse_pseudo_kind(std::string_view name);

struct Observation {
    double y;
    std::span<const double> x;
    int a;
};

inline Observation observation(const Dataset& data, std::size_t i)
{
    return {data.y(i), data.x(i), data.a(i)};
}

// Signed inverse-propensity factor (a - pi) / (pi (1 - pi)).
inline double propensity_factor(int a, double propensity) noexcept
{
    return (a - propensity) / (propensity * (1.0 - propensity));
}

// Doubly robust pseudo-outcome given already evaluated nuisances:
// factor * (1{y <= y_a} - F_a(y_a)) + F_1(y1) - F_0(y0).
double dr_pseudo_value(int a, double y, double y0, double y1, double propensity, double ccdf0_at_y0,
    double ccdf1_at_y1) noexcept;

double dr_pseudo(const Observation& z, double y0, double y1, const NuisanceSource& nuisance);

// factor * 1{y <= y_a}; only the propensity is consulted.
double ipw_pseudo(const Observation& z, double y0, double y1, const NuisanceSource& nuisance);

// dr_pseudo evaluated against exact nuisances.
double oracle_pseudo(const Observation& z, double y0, double y1, const NuisanceSource& truth);

struct PseudoEvaluation {
    double value;
    double y0;
    double y1;
    std::size_t index;
};

PseudoEvaluation evaluate_pseudo(PseudoKind kind, const Dataset& data, std::size_t index, double y0, double y1,
    const NuisanceSource& nuisance);

} // namespace cqc
