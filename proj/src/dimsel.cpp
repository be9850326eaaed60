#include "dccamon/dimsel.hpp"

#include <sstream>
#include <stdexcept>

#include "dccamon/rng.hpp"

namespace dccamon {

std::string DimSelReport::to_text() const {
    std::ostringstream os;
    os << "p_star " << p_star << "\n";
    os << "eps1 " << eps1 << "\n";
    os << "eps2 " << eps2 << "\n";
    os << "chosen_p " << chosen_p << "\n";
    os << "last_acceptable " << last_acceptable << "\n";
    os << "violated " << (violated ? 1 : 0) << "\n";
    os << "violated_at_start " << (violated_at_start ? 1 : 0) << "\n";
    os << "p loss1 loss2\n";
    for (const DimProbe& probe : probes)
        os << probe.p << " " << probe.loss1 << " " << probe.loss2 << "\n";
    return os.str();
}

DimSelReport select_dimension(const Matrix& signals, const Matrix& quality, int p_star,
                              double eps1, double eps2, std::uint64_t seed,
                              const DimSelOptions& options) {
    if (p_star < 1) throw std::invalid_argument("select_dimension: p_star must be at least 1");
    if (eps1 < 0.0 || eps2 < 0.0)
        throw std::invalid_argument("select_dimension: tolerances must be nonnegative");

    DimSelReport report;
    report.p_star = p_star;
    report.eps1 = eps1;
    report.eps2 = eps2;

    int p = p_star + 1;
    while (true) {
        p -= 1;
        if (p < 1) throw std::runtime_error("select_dimension: probe dimension reached 0");

        AeOptions o1 = options.signal_ae;
        AeOptions o2 = options.quality_ae;
        // fresh split and init per probed p, still pinned to the caller seed
        o1.seed = split_seed(seed, 0x5100 + p);
        o2.seed = split_seed(seed, 0x5200 + p);
        const AeResult ae1 = train_autoencoder(signals, p, o1);
        const AeResult ae2 = train_autoencoder(quality, p, o2);
        report.probes.push_back({p, ae1.validation_mse, ae2.validation_mse});

        const bool violation = ae1.validation_mse > eps1 || ae2.validation_mse > eps2;
        if (violation) {
            report.chosen_p = p;
            report.violated = true;
            report.violated_at_start = (p == p_star);
            report.last_acceptable = p + 1;
            return report;
        }
        if (p == 1) {
            report.chosen_p = 1;
            report.violated = false;
            report.last_acceptable = 1;
            return report;
        }
    }
}

}  // namespace dccamon
