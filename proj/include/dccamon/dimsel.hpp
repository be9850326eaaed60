#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dccamon/matrix.hpp"
#include "dccamon/neural.hpp"

namespace dccamon {

struct DimProbe {
    int p = 0;
    double loss1 = 0.0;  // signal autoencoder validation mse
    double loss2 = 0.0;  // quality autoencoder validation mse
};

struct DimSelReport {
    int chosen_p = 0;        // the dimension at which the loop exited
    int last_acceptable = 0; // chosen_p + 1 when a violation occurred
    bool violated = false;
    bool violated_at_start = false;
    std::vector<DimProbe> probes;
    double eps1 = 0.0, eps2 = 0.0;
    int p_star = 0;

    std::string to_text() const;
};

struct DimSelOptions {
    AeOptions signal_ae;
    AeOptions quality_ae;
};

/// Probes p = p_star, p_star-1, ... training one autoencoder per dataset at
/// each p, until either validation loss exceeds its tolerance. Returns the
/// violating p (and last_acceptable = p+1); when the tolerances never
/// trigger the loop stops at p = 1.
DimSelReport select_dimension(const Matrix& signals, const Matrix& quality, int p_star,
                              double eps1, double eps2, std::uint64_t seed,
                              const DimSelOptions& options = {});

}  // namespace dccamon
