#pragma once

#include "cqc/dataset.hpp"
#include "cqc/kernels.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace cqc {

// Anything that can supply the nuisance functions of the pseudo-outcome:
// a fitted NW model, or a closed-form simulation truth.
class NuisanceSource {
public:
    virtual ~NuisanceSource() = default;

    virtual double propensity(std::span<const double> x) const = 0;
    // F(y | x, arm)
    virtual double ccdf(int arm, double y, std::span<const double> x) const = 0;
    // inf { y : F(y | x, arm) >= alpha }
    virtual double quantile(int arm, double alpha, std::span<const double> x) const = 0;

    virtual std::vector<double> propensities(const Points& at) const;
    // Entry (j, q) is F(ys[q] | at.row(j), arm). ys need not be sorted.
    virtual Eigen::MatrixXd ccdf_matrix(int arm, const Points& at, std::span<const double> ys) const;
};

// Right-continuous step CDF built from weighted atoms.
class StepCdf {
public:
    StepCdf() = default;
    // points sorted ascending; masses nonnegative with positive total. Zero
    // masses are dropped and tied points merged.
    StepCdf(std::span<const double> sorted_points, std::span<const double> masses);

    double operator()(double y) const noexcept;
    // Generalised inverse over the jump points. alpha <= 0 returns the
    // smallest jump point. Throws UsageError for alpha outside [0, 1].
    double inverse(double alpha) const;

    std::span<const double> points() const noexcept { return points_; }
    std::span<const double> cumulative() const noexcept { return cumulative_; }

private:
    std::vector<double> points_;
    std::vector<double> cumulative_;
};

struct SplitPlan {
    std::vector<std::size_t> first;
    std::vector<std::size_t> second;
    std::uint64_t seed = 0;

    SplitPlan swapped() const { return {second, first, seed}; }
};

// Uniformly random half/half partition. Throws DataError for fewer than 4 rows.
SplitPlan make_split(const Dataset& dataset, std::uint64_t seed);

// NW regression of the treatment indicator, clamped into [xi, 1 - xi].
class PropensityModel {
public:
    PropensityModel(const Dataset& train, KernelSpec spec, double xi, MassPolicy policy = MassPolicy::widen);

    double operator()(std::span<const double> x) const;
    double raw(std::span<const double> x) const;
    double xi() const noexcept { return xi_; }

private:
    Points xs_;
    std::vector<double> treated_;
    KernelSpec spec_;
    double xi_;
    MassPolicy policy_;
};

// Arm-masked NW estimate of the conditional CDF of each arm.
class CcdfModel {
public:
    CcdfModel(const Dataset& train, KernelSpec spec, MassPolicy policy = MassPolicy::widen);

    double operator()(int arm, double y, std::span<const double> x) const;
    StepCdf conditional(int arm, std::span<const double> x) const;
    double quantile(int arm, double alpha, std::span<const double> x) const;
    Eigen::MatrixXd ccdf_matrix(int arm, const Points& at, std::span<const double> ys) const;

    const KernelSpec& kernel() const noexcept { return spec_; }

private:
    struct Arm {
        Points xs;              // arm rows ordered by outcome
        std::vector<double> ys; // ascending
    };
    const Arm& arm_rows(int arm) const;

    Arm arms_[2];
    KernelSpec spec_;
    MassPolicy policy_;
};

struct NuisanceOptions {
    KernelSpec propensity_kernel = KernelSpec::gaussian(0.03);
    KernelSpec ccdf_kernel = KernelSpec::gaussian(0.03);
    double xi = 0.05;
    MassPolicy policy = MassPolicy::widen;

    void validate() const;
};

// Propensity plus per-arm CCDFs fitted on one data split.
class NuisanceModel final : public NuisanceSource {
public:
    NuisanceModel(const Dataset& train, const NuisanceOptions& options);

    double propensity(std::span<const double> x) const override { return propensity_(x); }
    double ccdf(int arm, double y, std::span<const double> x) const override { return ccdf_(arm, y, x); }
    double quantile(int arm, double alpha, std::span<const double> x) const override
    {
        return ccdf_.quantile(arm, alpha, x);
    }
    Eigen::MatrixXd ccdf_matrix(int arm, const Points& at, std::span<const double> ys) const override
    {
        return ccdf_.ccdf_matrix(arm, at, ys);
    }

    const PropensityModel& propensity_model() const noexcept { return propensity_; }
    const CcdfModel& ccdf_model() const noexcept { return ccdf_; }
    std::size_t training_size() const noexcept { return training_size_; }

private:
    PropensityModel propensity_;
    CcdfModel ccdf_;
    std::size_t training_size_;
};

PropensityModel fit_propensity(const Dataset& train, const KernelSpec& spec, double xi,
    MassPolicy policy = MassPolicy::widen);
CcdfModel fit_ccdf(const Dataset& train, const KernelSpec& spec, MassPolicy policy = MassPolicy::widen);
double ccdf_generalised_inverse(const CcdfModel& model, int arm, double alpha, std::span<const double> x);

} // namespace cqc
