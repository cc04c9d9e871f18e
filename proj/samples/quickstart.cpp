// Evaluate the calibrated bench at a few waveplate angles, then simulate and
// fit one idler fringe scan.

#include "nlisim/nlisim.hpp"

#include <cstdio>

int main() {
    using namespace nlisim;
    const BenchConfig bench = BenchConfig::calibrated_default();

    std::printf("theta[deg]  r_p      visibility  r_dp\n");
    for (double theta : {25.37, 35.0, 44.0, 45.0, 55.0}) {
        BenchSettings s;
        s.theta_deg = theta;
        const auto state = assemble_state(bench, s);
        std::printf("%9.2f  %7.4f  %10.4f  %8.2f\n", theta, hwp_split(theta, bench.hwp_offset_deg),
                    visibility(state), detection_probe_ratio(state, bench.wavelengths, bench.rates()));
    }

    ScanPlan plan;
    plan.axis = Axis::idler;
    std::tie(plan.start, plan.stop) = scan_range_for_periods(Axis::idler, 3.0, bench.wavelengths);
    plan.steps = 200;
    plan.seed = 7;
    const auto record = run_scan(plan, bench);
    const auto fit = fit_fringe(record, {bench.wavelengths.idler, true, false});
    std::printf("\nidler scan: period %.1f nm, visibility %.4f, R^2 %.4f, SNR %.1f\n", fit.period * 1e9,
                fit.visibility_raw, fit.r_squared, fit.snr);
    return 0;
}
