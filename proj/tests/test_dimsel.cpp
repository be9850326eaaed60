#include <doctest.h>

#include <limits>

#include "dccamon/dimsel.hpp"
#include "dccamon/rng.hpp"

using namespace dccamon;

namespace {

// two datasets whose intrinsic dimension is 3 plus small noise
struct Fixture {
    Matrix signals;
    Matrix quality;
};

Fixture make_fixture() {
    Rng rng(401);
    const int rank = 3, n = 300;
    Matrix basis_s(6, rank), basis_q(8, rank), coords(rank, n);
    for (double& x : basis_s.data()) x = rng.normal();
    for (double& x : basis_q.data()) x = rng.normal();
    for (double& x : coords.data()) x = rng.normal();
    Fixture f{basis_s * coords, basis_q * coords};
    for (double& x : f.signals.data()) x += 0.02 * rng.normal();
    for (double& x : f.quality.data()) x += 0.02 * rng.normal();
    return f;
}

DimSelOptions fast_options() {
    DimSelOptions o;
    o.signal_ae.hidden = {};
    o.signal_ae.epochs = 250;
    o.signal_ae.learning_rate = 5e-3;
    o.quality_ae.hidden = {};
    o.quality_ae.epochs = 250;
    o.quality_ae.learning_rate = 5e-3;
    return o;
}

}  // namespace

TEST_CASE("infinite tolerances walk the probe down to one") {
    const Fixture f = make_fixture();
    DimSelOptions o = fast_options();
    o.signal_ae.epochs = 30;
    o.quality_ae.epochs = 30;
    const DimSelReport report = select_dimension(
        f.signals, f.quality, 5, std::numeric_limits<double>::infinity(),
        std::numeric_limits<double>::infinity(), 1, o);
    CHECK(report.chosen_p == 1);
    CHECK_FALSE(report.violated);
    CHECK(report.last_acceptable == 1);
    CHECK(report.probes.size() == 5);
    for (std::size_t i = 0; i < report.probes.size(); ++i)
        CHECK(report.probes[i].p == 5 - static_cast<int>(i));
}

TEST_CASE("zero tolerance violates immediately at p_star") {
    const Fixture f = make_fixture();
    DimSelOptions o = fast_options();
    o.signal_ae.epochs = 10;
    o.quality_ae.epochs = 10;
    const DimSelReport report = select_dimension(f.signals, f.quality, 5, 0.0, 1e9, 1, o);
    CHECK(report.chosen_p == 5);
    CHECK(report.violated);
    CHECK(report.violated_at_start);
    CHECK(report.probes.size() == 1);
}

TEST_CASE("selection lands at the constructed intrinsic dimension") {
    const Fixture f = make_fixture();
    const DimSelReport report =
        select_dimension(f.signals, f.quality, 5, 0.05, 0.05, 7, fast_options());
    CHECK(report.violated);
    // rank-3 data with tiny noise: p=3 reconstructs well, p=2 cannot
    CHECK(report.last_acceptable == 3);
    CHECK(report.chosen_p == 2);
}

TEST_CASE("losses trend downward as p grows") {
    const Fixture f = make_fixture();
    DimSelOptions o = fast_options();
    o.signal_ae.epochs = 120;
    o.quality_ae.epochs = 120;
    const DimSelReport report = select_dimension(
        f.signals, f.quality, 5, std::numeric_limits<double>::infinity(),
        std::numeric_limits<double>::infinity(), 5, o);
    // first probe (largest p) beats the last probe (p = 1) on both datasets
    CHECK(report.probes.front().loss1 <= report.probes.back().loss1);
    CHECK(report.probes.front().loss2 <= report.probes.back().loss2);
}

TEST_CASE("reports are reproducible under a fixed seed") {
    const Fixture f = make_fixture();
    DimSelOptions o = fast_options();
    o.signal_ae.epochs = 20;
    o.quality_ae.epochs = 20;
    const DimSelReport a = select_dimension(f.signals, f.quality, 4, 0.5, 0.5, 9, o);
    const DimSelReport b = select_dimension(f.signals, f.quality, 4, 0.5, 0.5, 9, o);
    CHECK(a.chosen_p == b.chosen_p);
    REQUIRE(a.probes.size() == b.probes.size());
    for (std::size_t i = 0; i < a.probes.size(); ++i) {
        CHECK(a.probes[i].loss1 == b.probes[i].loss1);
        CHECK(a.probes[i].loss2 == b.probes[i].loss2);
    }
    CHECK(a.to_text() == b.to_text());
}

TEST_CASE("argument validation") {
    const Fixture f = make_fixture();
    CHECK_THROWS_AS(select_dimension(f.signals, f.quality, 0, 1.0, 1.0, 1, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(select_dimension(f.signals, f.quality, 3, -1.0, 1.0, 1, {}),
                    std::invalid_argument);
}
