// scratch diagnostic: half-plane survival bias under step policies
#include <cmath>
#include <cstdio>

#include "bhlab/oracles.hpp"
#include "bhlab/sampler.hpp"

using namespace bhlab;

int main() {
    for (double beta : {0.4, 0.25}) {
        for (double dtm : {1e6, 0.5}) {
            mc::SamplerConfig cfg;
            cfg.dt_max = dtm;
            cfg.step_factor = beta;
            cfg.shell_eps = 1e-4;
            cfg.t_max = 2000.0;
            cfg.seed = 77;
            const auto b = mc::sample_batch(geom::make_half_plane(), {0, 1}, cfg, 200000, 2);
            double steps = 0;
            for (const auto& s : b.samples) steps += s.steps;
            std::printf("beta=%.2f dt_max=%g (avg steps %.0f):\n", beta, dtm, steps / b.size());
            for (double t : {17.0, 60.0, 200.0, 500.0}) {
                int sv = 0;
                for (const auto& s : b.samples) sv += (s.truncated || s.time > t) ? 1 : 0;
                const double ex = oracle::half_plane_survival(1.0, t);
                std::printf("  t=%6.0f  mc=%.5f exact=%.5f rel=%+.3f%%\n", t, double(sv) / b.size(), ex,
                            100.0 * (double(sv) / b.size() / ex - 1.0));
            }
        }
    }
    return 0;
}
