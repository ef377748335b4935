#include <chrono>
#include <cstdio>

#include "mrelax/relaxation.hpp"

using namespace mrelax;
using clk = std::chrono::steady_clock;

int main(int argc, char** argv) {
  std::setbuf(stdout, nullptr);
  Grid3 g(64);
  RunConfig cfg;
  cfg.scheme = (argc > 1 && std::string(argv[1]) == "vallis") ? Scheme::vallis : Scheme::moffatt;
  cfg.t_end = 5.0;
  cfg.cfl = 0.5;
  cfg.record_every = 50;
  auto t0 = clk::now();
  RunResult res = run(cfg, hopf_pair_config(g), g, [&](const DiagnosticsRecord& r) {
    double mins = std::chrono::duration<double>(clk::now() - t0).count() / 60.0;
    std::printf("t=%.4f E_mag=%.4f E_kin=%.4f H=%.2e arnold_lhs=%.4f [%.1f min]\n", r.t, r.E_mag,
                r.E_kin, r.H_total, r.arnold_lhs, mins);
  });
  double mins = std::chrono::duration<double>(clk::now() - t0).count() / 60.0;
  std::printf("done: records=%zu aborted=%d (%s) final_t=%.4f total %.1f min\n",
              res.series.size(), int(res.aborted), res.abort_reason.c_str(), res.final.t, mins);
  return 0;
}
