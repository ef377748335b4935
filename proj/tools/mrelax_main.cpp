#include <CLI11.hpp>
#include <iostream>

#include "mrelax/cli.hpp"

using namespace mrelax;

namespace {

int finish(const ExperimentOutcome& out) {
  if (!out.violation.empty()) {
    std::cerr << "invariant violation: " << out.violation << "\n";
    return 2;
  }
  return 0;
}

int cmd_hopf_pair(int n, const std::string& scheme, double t_end, double cfl,
                  const std::string& out, bool plot) {
  ExperimentConfig cfg;
  cfg.n = n;
  cfg.hopf_pair = true;
  cfg.out_prefix = out;
  cfg.run.scheme = scheme == "vallis" ? Scheme::vallis : Scheme::moffatt;
  cfg.run.t_end = t_end;
  cfg.run.cfl = cfl;
  cfg.run.validate();
  return finish(run_experiment(cfg, plot, &std::cout));
}

int cmd_woltjer(double c, int n, double L, bool descent, const std::string& out) {
  Grid3 g(n, L);
  WoltjerSolution sol = woltjer_minimizer(c, g);
  std::cout << "lambda=" << sol.lambda << " E=" << sol.E << " H=" << sol.H << "\n";
  write_snapshot(out, {g, 0.0, {"woltjer"}, {sol.field}});
  if (descent) {
    if (c != 0.0) {
      // perturb with a helicity-free mode (equal plus and minus parts) so
      // the descent has real work to do while H stays exactly c
      VectorField start = sol.field;
      double lambda1 = two_pi / g.L;
      double eps = 0.2 * std::sqrt(std::abs(sol.E) / (g.L * g.L * g.L));
      for (int iz = 0; iz < g.n; ++iz) {
        double zval = eps * std::cos(2.0 * lambda1 * g.h() * iz);
        for (int iy = 0; iy < g.n; ++iy)
          for (int ix = 0; ix < g.n; ++ix) start[0][g.idx(ix, iy, iz)] += zval;
      }
      DescentResult d = constrained_descent(start, c);
      std::cout << "descent: E=" << d.E << " H=" << d.H
                << " beltrami_residual=" << d.beltrami_residual << "\n";
      if (std::abs(d.E - sol.E) > 1e-6 * std::max(1.0, sol.E)) {
        std::cerr << "invariant violation: descent energy disagrees with closed form\n";
        return 2;
      }
    } else {
      std::cout << "descent: E=0 H=0 beltrami_residual=0\n";
    }
  }
  return 0;
}

int cmd_relax(const std::string& config_path, bool plot) {
  ExperimentConfig cfg = parse_config(config_path);
  cfg.run.validate();
  return finish(run_experiment(cfg, plot, &std::cout));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for topological magnetic relaxation"};
  app.require_subcommand(1);

  int n = 64;
  std::string scheme = "moffatt";
  double t_end = 5.0, cfl = 0.4;
  std::string out = "hopf";
  bool plot = false;
  auto* hopf = app.add_subcommand("hopf-pair", "relax the canned Hopf-link pair");
  hopf->add_option("--n", n, "grid resolution");
  hopf->add_option("--scheme", scheme, "moffatt or vallis")
      ->check(CLI::IsMember({"moffatt", "vallis"}));
  hopf->add_option("--t-end", t_end, "integration horizon");
  hopf->add_option("--cfl", cfl, "Courant factor in (0, 1]");
  hopf->add_option("--out", out, "output prefix");
  hopf->add_flag("--plot", plot, "write an SVG chart of the series");

  double c = 1.0, L = two_pi;
  int wn = 32;
  bool descent = false;
  std::string wout = "woltjer.snap";
  auto* wol = app.add_subcommand("woltjer", "closed-form constrained minimizer");
  wol->add_option("--helicity", c, "helicity constraint");
  wol->add_option("--n", wn, "grid resolution");
  wol->add_option("--L", L, "box size");
  wol->add_flag("--descent", descent, "cross-check with constrained descent");
  wol->add_option("--out", wout, "snapshot path");

  std::string config_path;
  bool rplot = false;
  auto* rel = app.add_subcommand("relax", "run a configured link experiment");
  rel->add_option("--config", config_path, "key-value config file")->required();
  rel->add_flag("--plot", rplot, "write an SVG chart of the series");

  CLI11_PARSE(app, argc, argv);
  try {
    if (hopf->parsed()) return cmd_hopf_pair(n, scheme, t_end, cfl, out, plot);
    if (wol->parsed()) return cmd_woltjer(c, wn, L, descent, wout);
    if (rel->parsed()) return cmd_relax(config_path, rplot);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
