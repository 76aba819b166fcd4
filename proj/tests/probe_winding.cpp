// scratch diagnostic: winding-time law vs the exact half-plane survival
#include <cmath>
#include <cstdio>

#include "bhlab/oracles.hpp"
#include "bhlab/sampler.hpp"

using namespace bhlab;

int main() {
    const double kPi = 3.141592653589793;
    mc::SamplerConfig cfg;
    cfg.dt_max = 0.05;
    cfg.step_factor = 0.3;
    cfg.shell_eps = 1e-4;
    cfg.t_max = 100.0;
    cfg.seed = 7;
    const auto bw = mc::sample_winding_batch(kPi / 2, {1, 0}, cfg, 60000, 2);
    const auto bh = mc::sample_batch(geom::make_half_plane(), {0, 1}, cfg, 60000, 2);
    std::printf("   t   exact     winding   halfplane\n");
    for (double t : {0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0, 80.0}) {
        int sw = 0, sh = 0;
        for (const auto& s : bw.samples) sw += (s.truncated || s.time > t) ? 1 : 0;
        for (const auto& s : bh.samples) sh += (s.truncated || s.time > t) ? 1 : 0;
        std::printf("%6.2f  %.5f  %.5f  %.5f\n", t, oracle::half_plane_survival(1.0, t),
                    double(sw) / bw.size(), double(sh) / bh.size());
    }
    double mw = 0, mh = 0, stepsw = 0, stepsh = 0;
    for (const auto& s : bw.samples) { mw += std::min(s.time, 100.0); stepsw += s.steps; }
    for (const auto& s : bh.samples) { mh += std::min(s.time, 100.0); stepsh += s.steps; }
    std::printf("mean: winding %.4f halfplane %.4f   steps: %.0f vs %.0f\n", mw / bw.size(), mh / bh.size(),
                stepsw / bw.size(), stepsh / bh.size());
    return 0;
}
