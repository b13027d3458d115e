#pragma once

// Binary-defect model for angle-of-attack vanes. AOA values are
// normalized to [0, 1]. A healthy vane reports the true AOA exactly; a
// defective vane reports a uniform draw on [0, 1] that is independent of
// the true AOA and is redrawn on every read.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoaq/random_stream.hpp"

namespace aoaq {

struct FaultModel {
    double defect_probability = 0.0;

    void validate() const {
        if (!(defect_probability >= 0.0 && defect_probability <= 1.0)) {
            throw std::invalid_argument("defect probability must lie in [0, 1], got " +
                                        std::to_string(defect_probability));
        }
    }

    bool operator==(const FaultModel&) const = default;
};

using DefectMask = std::vector<bool>;

struct PanelSample {
    double true_aoa = 0.0;
    DefectMask defect_mask;
    std::vector<double> readings;

    std::size_t size() const noexcept { return readings.size(); }
    std::size_t defect_count() const noexcept;
};

inline void require_normalized_aoa(double aoa) {
    if (!(aoa >= 0.0 && aoa <= 1.0)) {
        throw std::invalid_argument("AOA must be normalized to [0, 1], got " + std::to_string(aoa));
    }
}

// Writes n independent Bernoulli(f) flags into `mask`, reusing its storage.
template <UniformSource Rng>
void draw_defect_mask_into(const FaultModel& fault, std::size_t n, Rng& rng, DefectMask& mask) {
    if (n == 0) throw std::invalid_argument("sensor count must be at least 1");
    fault.validate();
    mask.resize(n);
    const double f = fault.defect_probability;
    // uniform01() < 1 always, so f == 1 marks every sensor and f == 0 none.
    for (std::size_t i = 0; i < n; ++i) mask[i] = rng.uniform01() < f;
}

template <UniformSource Rng>
DefectMask draw_defect_mask(const FaultModel& fault, std::size_t n, Rng& rng) {
    DefectMask mask;
    draw_defect_mask_into(fault, n, rng, mask);
    return mask;
}

// Healthy sensors consume no randomness.
template <UniformSource Rng>
double read_sensor(double true_aoa, bool defective, Rng& rng) {
    require_normalized_aoa(true_aoa);
    return defective ? rng.uniform01() : true_aoa;
}

// Fills readings for an already-fixed defect mask.
template <UniformSource Rng>
void read_panel_into(double true_aoa, const DefectMask& mask, Rng& rng, PanelSample& out) {
    require_normalized_aoa(true_aoa);
    out.true_aoa = true_aoa;
    out.defect_mask = mask;
    out.readings.resize(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        out.readings[i] = mask[i] ? rng.uniform01() : true_aoa;
    }
}

template <UniformSource Rng>
void sample_panel_into(double true_aoa, const FaultModel& fault, std::size_t n, Rng& rng,
                       PanelSample& out) {
    require_normalized_aoa(true_aoa);
    draw_defect_mask_into(fault, n, rng, out.defect_mask);
    out.true_aoa = true_aoa;
    out.readings.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.readings[i] = out.defect_mask[i] ? rng.uniform01() : true_aoa;
    }
}

template <UniformSource Rng>
PanelSample sample_panel(double true_aoa, const FaultModel& fault, std::size_t n, Rng& rng) {
    PanelSample out;
    sample_panel_into(true_aoa, fault, n, rng, out);
    return out;
}

}  // namespace aoaq
