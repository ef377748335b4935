// Experiment plumbing: snapshot file format, key-value run configs, CSV and
// SVG emission, and the canned experiment drivers behind the command line.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "mrelax/relaxation.hpp"

namespace mrelax {

struct Snapshot {
  Grid3 grid;
  double t = 0;
  std::vector<std::string> labels;
  std::vector<VectorField> fields;
};

namespace detail {

inline constexpr char snapshot_magic[] = "mrelax-snapshot";
inline constexpr std::uint64_t snapshot_sentinel = 1;

inline void put_u64_le(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xff;
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t get_u64_le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

inline void put_doubles_le(std::ostream& os, const std::vector<double>& v) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * 8));
  } else {
    for (double d : v) {
      std::uint64_t u;
      std::memcpy(&u, &d, 8);
      put_u64_le(os, u);
    }
  }
}

inline void get_doubles_le(std::istream& is, std::vector<double>& v) {
  if constexpr (std::endian::native == std::endian::little) {
    is.read(reinterpret_cast<char*>(v.data()), std::streamsize(v.size() * 8));
  } else {
    for (double& d : v) {
      std::uint64_t u = get_u64_le(is);
      std::memcpy(&d, &u, 8);
    }
  }
}

inline std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace detail

// Header: one text line "mrelax-snapshot n=.. L=.. t=.. fields=a,b flags=.."
// followed by a little-endian 8-byte sentinel (detects byte-swapped files)
// and the payload: per field, 3 arrays of n^3 little-endian doubles,
// x-fastest.
inline void write_snapshot(const std::string& path, const Snapshot& snap) {
  if (snap.labels.size() != snap.fields.size())
    throw std::invalid_argument("write_snapshot: label/field count mismatch");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  std::ostringstream hdr;
  hdr.precision(17);
  hdr << detail::snapshot_magic << " n=" << snap.grid.n << " L=" << snap.grid.L
      << " t=" << snap.t << " fields=" << detail::join(snap.labels, ',')
      << " flags=energy-no-half,bilinear-helicity\n";
  os << hdr.str();
  detail::put_u64_le(os, detail::snapshot_sentinel);
  for (const VectorField& f : snap.fields)
    for (int d = 0; d < 3; ++d) detail::put_doubles_le(os, f.c[d]);
  if (!os) throw std::runtime_error("write failed: " + path);
}

inline Snapshot read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  std::string hdr;
  if (!std::getline(is, hdr) || hdr.rfind(detail::snapshot_magic, 0) != 0)
    throw std::runtime_error("corrupt snapshot (bad magic): " + path);
  int n = 0;
  double L = 0, t = 0;
  std::vector<std::string> labels;
  for (const std::string& tok : detail::split(hdr, ' ')) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "n") n = std::stoi(val);
    else if (key == "L") L = std::stod(val);
    else if (key == "t") t = std::stod(val);
    else if (key == "fields") labels = detail::split(val, ',');
  }
  if (n <= 0 || L <= 0 || labels.empty())
    throw std::runtime_error("corrupt snapshot (bad header): " + path);
  if (detail::get_u64_le(is) != detail::snapshot_sentinel || !is)
    throw std::runtime_error("corrupt snapshot (foreign byte order or truncated): " + path);
  Snapshot snap;
  snap.grid = Grid3(n, L);
  snap.t = t;
  snap.labels = labels;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    VectorField f(snap.grid);
    for (int d = 0; d < 3; ++d) {
      detail::get_doubles_le(is, f.c[d]);
      if (!is) throw std::runtime_error("corrupt snapshot (truncated payload): " + path);
    }
    snap.fields.push_back(std::move(f));
  }
  is.peek();
  if (!is.eof()) throw std::runtime_error("corrupt snapshot (trailing bytes): " + path);
  return snap;
}

inline Snapshot snapshot_roundtrip(const std::string& path) { return read_snapshot(path); }

// Key-value config: one "key = value" per line, '#' comments.  Tube lines
// repeat: "tube = <curve.csv>,<radius>,<flux>[,<label>]"; "hopf_pair = true"
// selects the canned link instead.
struct ExperimentConfig {
  RunConfig run;
  int n = 64;
  double L = two_pi;
  bool hopf_pair = false;
  std::vector<std::string> tube_curves;
  std::vector<double> tube_radii;
  std::vector<double> tube_fluxes;
  std::vector<std::string> tube_labels;
  std::string out_prefix = "mrelax_out";
};

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    auto a = s.find_first_not_of(ws), b = s.find_last_not_of(ws);
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    std::string t = trim(line.substr(0, line.find('#')));
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq)), val = trim(t.substr(eq + 1));
    try {
      if (key == "scheme") {
        if (val == "moffatt") cfg.run.scheme = Scheme::moffatt;
        else if (val == "vallis") cfg.run.scheme = Scheme::vallis;
        else throw std::runtime_error("unknown scheme: " + val);
      } else if (key == "t_end") cfg.run.t_end = std::stod(val);
      else if (key == "cfl") cfg.run.cfl = std::stod(val);
      else if (key == "record_every") cfg.run.record_every = std::stoi(val);
      else if (key == "rho") cfg.run.rho = std::stod(val);
      else if (key == "mu") cfg.run.mu = std::stod(val);
      else if (key == "n") cfg.n = std::stoi(val);
      else if (key == "L") cfg.L = std::stod(val);
      else if (key == "out") cfg.out_prefix = val;
      else if (key == "hopf_pair") cfg.hopf_pair = (val == "true" || val == "1");
      else if (key == "tube") {
        auto parts = detail::split(val, ',');
        if (parts.size() < 3) throw std::runtime_error("tube needs curve,radius,flux[,label]");
        cfg.tube_curves.push_back(trim(parts[0]));
        cfg.tube_radii.push_back(std::stod(parts[1]));
        cfg.tube_fluxes.push_back(std::stod(parts[2]));
        cfg.tube_labels.push_back(parts.size() > 3 ? trim(parts[3])
                                                   : "tube" + std::to_string(cfg.tube_curves.size() - 1));
      } else throw std::runtime_error("unknown key: " + key);
    } catch (const std::invalid_argument&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  if (!cfg.hopf_pair && cfg.tube_curves.empty())
    throw std::runtime_error(path + ": config defines no field (hopf_pair or tube entries)");
  return cfg;
}

inline void write_series_csv(const std::string& path, const std::vector<DiagnosticsRecord>& series) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  if (series.empty()) return;
  os << DiagnosticsRecord::csv_header(series.front().H_comp.size()) << '\n';
  for (const auto& r : series) os << r.csv_row() << '\n';
  if (!os) throw std::runtime_error("write failed: " + path);
}

// Minimal line chart of E_mag, E_kin and H_total against t.
inline void write_series_svg(const std::string& path, const std::vector<DiagnosticsRecord>& series) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  const int W = 720, H = 420, M = 50;
  double t0 = series.front().t, t1 = series.back().t;
  if (t1 <= t0) t1 = t0 + 1;
  double lo = 0, hi = 1e-300;
  for (const auto& r : series) {
    for (double v : {r.E_mag, r.E_kin, r.H_total}) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  auto X = [&](double t) { return M + (W - 2 * M) * (t - t0) / (t1 - t0); };
  auto Y = [&](double v) { return H - M - (H - 2 * M) * (v - lo) / (hi - lo); };
  auto poly = [&](auto get, const char* color) {
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& r : series) os << X(r.t) << ',' << Y(get(r)) << ' ';
    os << "\"/>\n";
  };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\"" << H - M
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << M << "\" y=\"" << M - 10 << "\" font-size=\"12\">max=" << hi
     << "  (black: E_mag, blue: E_kin, red: H_total)  t in [" << t0 << ", " << t1
     << "]</text>\n";
  poly([](const DiagnosticsRecord& r) { return r.E_mag; }, "black");
  poly([](const DiagnosticsRecord& r) { return r.E_kin; }, "blue");
  poly([](const DiagnosticsRecord& r) { return r.H_total; }, "red");
  os << "</svg>\n";
}

// Lower energy floor certified from pairwise cross-helicities: components
// are grouped in consecutive pairs; each pair with initially disjoint
// supports contributes lambda1 * |H(pair)|.  The grouping is certified only
// while inter-pair couplings stay below 1e-2 * E0.
inline double certified_floor(const DiagnosticsRecord& r, double lambda1, double E0) {
  std::size_t K = r.H_comp.size();
  if (K % 2 != 0) return lambda1 * std::abs(r.H_total);
  double floor = 0;
  for (std::size_t p = 0; p + 1 < K; p += 2)
    floor += std::abs(r.H_cross[p][p] + r.H_cross[p + 1][p + 1] + 2.0 * r.H_cross[p][p + 1]);
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = i + 1; j < K; ++j)
      if (j != i + 1 || i % 2 != 0)
        if (std::abs(r.H_cross[i][j]) > 1e-2 * E0) return lambda1 * std::abs(r.H_total);
  return lambda1 * floor;
}

struct ExperimentOutcome {
  RunResult result;
  double final_E = 0;
  double floor = 0;
  std::string violation;  // empty if every invariant held
};

// Shared driver: build the link, run, emit CSV + initial/final snapshots +
// optional SVG, then re-validate the series invariants.
inline ExperimentOutcome run_experiment(const ExperimentConfig& cfg, bool plot = false,
                                        std::ostream* log = nullptr) {
  Grid3 g(cfg.n, cfg.L);
  LinkConfig link;
  if (cfg.hopf_pair) {
    link = hopf_pair_config(g);
  } else {
    for (std::size_t i = 0; i < cfg.tube_curves.size(); ++i)
      link.tubes.push_back(make_tube(load_curve_csv(cfg.tube_curves[i]), cfg.tube_radii[i],
                                     cfg.tube_fluxes[i]));
    link.labels = cfg.tube_labels;
  }

  RelaxationState s0;
  s0.components = build_link_field(link, g);
  s0.v = VectorField(g);
  s0.rho = cfg.run.rho;
  s0.mu = cfg.run.mu;

  write_snapshot(cfg.out_prefix + "_initial.snap",
                 {g, 0.0, s0.components.labels, s0.components.components});

  // the instantaneous scheme is stiff near its plateau: stop once the
  // energy slope between records falls below 1e-6 E0 per unit time
  double E0 = energy(s0.components.total());
  double last_E = E0, last_t = 0;
  auto stop = [&](const DiagnosticsRecord& r) {
    bool plateau = cfg.run.scheme == Scheme::vallis && r.t > last_t &&
                   (last_E - r.E_mag) / (r.t - last_t) < 1e-6 * E0;
    last_E = r.E_mag;
    last_t = r.t;
    return plateau;
  };

  ExperimentOutcome out;
  out.result = run(cfg.run, s0, {}, stop);
  const RunResult& res = out.result;
  write_series_csv(cfg.out_prefix + "_series.csv", res.series);
  write_snapshot(cfg.out_prefix + "_final.snap",
                 {g, res.final.t, res.final.components.labels, res.final.components.components});
  if (plot) write_series_svg(cfg.out_prefix + "_series.svg", res.series);

  const double lambda1 = two_pi / g.L;
  out.final_E = res.series.back().E_mag;
  out.floor = certified_floor(res.series.front(), lambda1, E0);
  if (log)
    *log << "final_E=" << out.final_E << ", woltjer_E=0, floor=" << out.floor << "\n";

  if (res.aborted) {
    out.violation = res.abort_reason.empty() ? "run aborted" : res.abort_reason;
    return out;
  }
  double E_prev = 1e300;
  for (const auto& r : res.series) {
    double E_tot = r.E_mag + r.E_kin;
    if (E_tot > E_prev + 1e-10 * E0) out.violation = "total energy not monotone";
    if (r.E_mag < lambda1 * std::abs(r.H_total) - 1e-10 * E0)
      out.violation = "Arnold floor violated";
    E_prev = E_tot;
  }
  return out;
}

}  // namespace mrelax
