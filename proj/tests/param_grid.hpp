#pragma once

// Parameter sets shared by the distribution tests and the acceptance suite.

#include "gollgr/gollgr_model.hpp"

#include <numbers>
#include <string>
#include <vector>

namespace gollgr::testing {

struct NamedParams {
    std::string label;
    GollgrParams params;
};

inline GollgrParams make(double alpha, double beta, double delta, double theta) {
    return GollgrParams{alpha, beta, GrParams{delta, theta}};
}

/// Truth of the reference distribution simulation study.
inline GollgrParams table1_truth() { return make(0.35, 0.55, -0.55, 0.11); }

/// Bimodal member of the alpha = 0.3, beta = 2, theta = 15 family.
inline GollgrParams bimodal_params() { return make(0.3, 2.0, 4.0, 15.0); }

inline std::vector<NamedParams> distribution_grid() {
    return {
        {"table1", table1_truth()},
        {"fig1a-1", make(0.5, 0.5, 1.5, 15.0)},
        {"fig1a-2", make(2.0, 3.0, 1.5, 15.0)},
        {"fig1a-3", make(0.2, 5.0, 1.5, 15.0)},
        {"fig1b-1", make(0.3, 2.0, 0.0, 15.0)},
        {"fig1b-2", make(0.3, 2.0, 1.5, 15.0)},
        {"fig1b-3", make(0.3, 2.0, 4.0, 15.0)},
        {"fig1b-4", make(0.3, 2.0, 8.0, 15.0)},
        {"fig1c-1", make(0.3, 1.5, 1.5, 0.5)},
        {"fig1c-2", make(0.3, 1.5, 1.5, 5.0)},
        {"fig1c-3", make(0.3, 1.5, 1.5, 50.0)},
        {"fig2a-1", make(0.1, 2.5, 1.5, 1.0)},
        {"fig2a-2", make(0.1, 0.5, 1.5, 1.0)},
        {"fig2a-3", make(0.1, 5.0, 1.5, 0.2)},
        {"fig2b-1", make(0.3, 2.5, -0.5, 1.0)},
        {"fig2b-2", make(0.3, 2.5, 1.0, 3.0)},
        {"fig2b-3", make(0.3, 2.5, 3.0, 0.5)},
        {"fig2c-1", make(0.1, 2.5, 1.0, 1.0)},
        {"fig2c-2", make(0.1, 1.0, 0.0, 2.0)},
        {"fig2c-3", make(0.1, 8.0, -0.3, 1.0)},
        {"rayleigh", make(1.0, 1.0, 0.0, 1.0)},
        {"finite-limit", make(2.0, 0.5, -0.5, std::numbers::pi / 4.0)},
        {"tail-a", make(2.0, 1.3, 0.5, 1.0)},
        {"tail-b", make(0.7, 0.8, 0.5, 1.0)},
    };
}

/// Parameter sets for the sampler goodness-of-fit check.
inline std::vector<NamedParams> sampler_sets() {
    return {
        {"table1", table1_truth()},
        {"rayleigh", make(1.0, 1.0, 0.0, 1.0)},
        {"bimodal", bimodal_params()},
        {"heavy-odds", make(0.1, 2.5, 1.0, 1.0)},
        {"large-alpha", make(3.0, 0.4, 2.0, 0.5)},
    };
}

}  // namespace gollgr::testing
