#pragma once

// Command-line front end. run() is the whole program; tools/surfenv.cpp only
// forwards argv. Exit codes: 0 success or consistent, 1 error, 2 violated.

#include "surfenv/surfenv.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace surfenv::cli {

struct Config {
  int dimension = 2;
  int resolution = 180;
  double lp_tol = 1e-9;
  int refine_iters = 0;
  double quadrature_tol = 1e-8;
  int samples = 200;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

inline std::string read_file(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::parse_error,
          what + ": cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const std::string& path, const std::string& what) {
  const std::string text = read_file(path, what);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse_error, what + ": malformed JSON in '" + path + "': " + e.what());
  }
}

inline Config config_from_json(const json& j) {
  require(j.is_object(), ErrorKind::parse_error, "config: expected a JSON object");
  Config c;
  auto num = [&](const char* key, auto& target) {
    if (!j.contains(key)) return;
    require(j[key].is_number(), ErrorKind::parse_error,
            std::string("config.") + key + ": expected a number");
    target = j[key].get<std::remove_reference_t<decltype(target)>>();
  };
  num("dimension", c.dimension);
  num("resolution", c.resolution);
  num("lp_tol", c.lp_tol);
  num("refine_iters", c.refine_iters);
  num("quadrature_tol", c.quadrature_tol);
  num("samples", c.samples);
  if (j.contains("seed")) {
    require(j["seed"].is_number_unsigned(), ErrorKind::parse_error,
            "config.seed: expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("out")) {
    require(j["out"].is_string(), ErrorKind::parse_error, "config.out: expected a string");
    c.out_dir = j["out"].get<std::string>();
  }
  require(c.lp_tol > 0.0, ErrorKind::parse_error, "config.lp_tol must be > 0");
  require(c.quadrature_tol > 0.0, ErrorKind::parse_error, "config.quadrature_tol must be > 0");
  require(c.samples >= 0, ErrorKind::parse_error, "config.samples must be >= 0");
  require(c.refine_iters >= 0, ErrorKind::parse_error, "config.refine_iters must be >= 0");
  require(c.dimension >= 1, ErrorKind::parse_error, "config.dimension must be >= 1");
  return c;
}

// Explicit --config wins, then $SURFENV_CONFIG, then built-in defaults.
inline Config load_config(const std::string& path) {
  std::string p = path;
  if (p.empty())
    if (const char* env = std::getenv("SURFENV_CONFIG")) p = env;
  if (p.empty()) return {};
  return config_from_json(read_json(p, "config"));
}

inline Density load_density(const std::string& path, bool require_valid = true) {
  Density d = density_from_json(read_json(path, "density"));
  if (require_valid) {
    const auto rep = validate(d, 200, 0);
    require(rep.passes(), ErrorKind::invalid_argument,
            "density: fails validation (nonnegativity " + std::to_string(rep.nonnegativity) +
                ", evenness " + std::to_string(rep.evenness) + ", homogeneity " +
                std::to_string(rep.homogeneity) +
                "); run 'validate' for details. Checks are undefined for such densities");
  }
  return d;
}

struct Output {
  std::ostream& out;
  std::string dir;

  // Writes name into the output directory, or the text to stdout without one.
  void write(const std::string& name, const std::string& text) const {
    if (dir.empty()) {
      out << text;
      return;
    }
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path);
    require(static_cast<bool>(f), ErrorKind::invalid_argument,
            "--out: cannot write '" + path.string() + "'");
    f << text;
  }
};

inline void write_file(const std::string& path, const std::string& text, const char* flag) {
  std::ofstream f(path);
  require(static_cast<bool>(f), ErrorKind::invalid_argument,
          std::string(flag) + ": cannot write '" + path + "'");
  f << text;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::vector<int> default_ks() { return {4, 8, 16, 32, 64}; }

inline std::uint64_t need_seed(const std::optional<std::uint64_t>& seed, const char* cmd) {
  require(seed.has_value(), ErrorKind::invalid_argument,
          std::string(cmd) + ": --seed is required (or 'seed' in the config file)");
  return *seed;
}

/// Builds a construction from a parameter object such as
/// {"lambda": [..], "eta": [..], "xi": [..], "eta1": [..], "eta2": [..],
///  "atoms": [{"lambda": [..], "eta": [..]}, ...], "k": 8}.
inline Construction construction_from_json(const Density& d, const std::string& family,
                                           const json& p, int k) {
  require(p.is_object(), ErrorKind::parse_error, "params: expected a JSON object");
  const int n = d.dimension();
  auto vec = [&](const char* key) {
    return vec_from_json(detail::field_of(p, key, "params"), std::string("params.") + key);
  };
  auto vec_or = [&](const char* key, Vec fallback) {
    return p.contains(key) ? vec(key) : fallback;
  };
  const Vec eta = vec_or("eta", Vec::Unit(n, n - 1));
  if (family == "single_jump") return single_jump(d, vec("lambda"), eta);
  if (family == "subadditivity_strip")
    return subadditivity_strip(d, vec("lambda"), vec("xi"), eta, k);
  if (family == "eta_convexity_triangles")
    return eta_convexity_triangles(d, vec("lambda"), vec("eta1"), vec("eta2"), k);
  if (family == "symmetry_triangles") return symmetry_triangles(d, vec("lambda"), k, eta);
  if (family == "silhavy_lattice") {
    const Vec lambda = vec("lambda");
    std::vector<std::pair<Vec, Vec>> atoms;
    if (p.contains("atoms")) {
      const json& aj = p["atoms"];
      require(aj.is_array(), ErrorKind::parse_error, "params.atoms: expected an array");
      for (std::size_t i = 0; i < aj.size(); ++i) {
        const std::string where = "params.atoms[" + std::to_string(i) + "]";
        atoms.emplace_back(
            vec_from_json(detail::field_of(aj[i], "lambda", where.c_str()), where + ".lambda"),
            vec_from_json(detail::field_of(aj[i], "eta", where.c_str()), where + ".eta"));
      }
    } else {
      atoms = symmetrized_atoms(lambda, eta);
    }
    return silhavy_lattice(d, lambda, eta, atoms, k);
  }
  throw Error(ErrorKind::parse_error, "--family: unknown '" + family + "'");
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Elliptic envelopes and competitor constructions for surface densities",
               "surfenv"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "config JSON (default: $SURFENV_CONFIG)");

  std::string density_path, matrix_path, field_path, params_path, family, csv_path,
      plot_path, out_dir, test = "all";
  std::optional<int> resolution, refine, samples, k;
  std::optional<std::uint64_t> seed;
  std::optional<double> qtol;
  std::vector<int> ks;
  bool symmetric = false;

  auto common = [&](CLI::App* s, bool randomized) {
    s->add_option("-d,--density", density_path, "density JSON")->required();
    s->add_option("--out", out_dir, "output directory (default: stdout)");
    if (randomized) s->add_option("--seed", seed, "RNG seed");
  };

  auto* env_cmd = app.add_subcommand("envelope", "envelope of a matrix");
  common(env_cmd, true);
  env_cmd->add_option("-F,--matrix", matrix_path, "matrix JSON, array of rows")->required();
  env_cmd->add_option("--resolution", resolution, "dictionary resolution");
  env_cmd->add_option("--refine-iters", refine, "refinement iterations");
  env_cmd->add_flag("--symmetric", symmetric, "constraint on the symmetric part");

  auto* check_cmd = app.add_subcommand("check", "ellipticity tests");
  common(check_cmd, true);
  check_cmd->add_option("--test", test, "test to run")
      ->check(CLI::IsMember({"subadd", "eta-convex", "bd-sym", "bv", "bd", "constructions", "all"}));
  check_cmd->add_option("--samples", samples, "random samples per test");
  check_cmd->add_option("--resolution", resolution, "dictionary resolution");
  check_cmd->add_option("--refine-iters", refine, "refinement iterations");
  check_cmd->add_option("--ks", ks, "k values for construction bounds");

  auto* cons_cmd = app.add_subcommand("construct", "competitor field and closed forms");
  common(cons_cmd, false);
  cons_cmd->add_option("--family", family, "construction family")->required();
  cons_cmd->add_option("-p,--params", params_path, "parameter JSON")->required();
  cons_cmd->add_option("-k", k, "k of the field (default 8)");
  cons_cmd->add_option("--ks", ks, "k values of the closed-form table");
  cons_cmd->add_option("--csv", csv_path, "closed-form table CSV");
  cons_cmd->add_option("--plot", plot_path, "k-vs-energy CSV with per-term columns");

  auto* energy_cmd = app.add_subcommand("energy", "jump energy of a field");
  common(energy_cmd, false);
  energy_cmd->add_option("-u,--field", field_path, "field JSON")->required();
  energy_cmd->add_option("--csv", csv_path, "per-edge CSV");
  energy_cmd->add_option("--quad-tol", qtol, "quadrature tolerance");

  auto* dict_cmd = app.add_subcommand("dict", "atom dictionary");
  common(dict_cmd, true);
  dict_cmd->add_option("--resolution", resolution, "dictionary resolution");

  auto* val_cmd = app.add_subcommand("validate", "check the standing assumptions");
  common(val_cmd, true);
  val_cmd->add_option("--samples", samples, "random samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    Config cfg = load_config(config_path);
    if (resolution) cfg.resolution = *resolution;
    if (refine) cfg.refine_iters = *refine;
    if (samples) cfg.samples = *samples;
    if (seed) cfg.seed = seed;
    if (qtol) cfg.quadrature_tol = *qtol;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    require(cfg.quadrature_tol > 0.0, ErrorKind::invalid_argument, "--quad-tol must be > 0");
    require(cfg.samples >= 0, ErrorKind::invalid_argument, "--samples must be >= 0");
    require(cfg.refine_iters >= 0, ErrorKind::invalid_argument, "--refine-iters must be >= 0");
    const Output sink{out, cfg.out_dir};
    LpOptions lp;
    lp.feasibility_tol = cfg.lp_tol;

    if (*env_cmd) {
      const std::uint64_t s = need_seed(cfg.seed, "envelope");
      const Density d = load_density(density_path);
      const Mat F = mat_from_json(read_json(matrix_path, "matrix"), "matrix");
      const auto dict = sample_dictionary(d, cfg.resolution, s);
      EnvelopeOptions eo{lp, cfg.refine_iters};
      const auto r = envelope(d, F, dict,
                              symmetric ? ConstraintMode::symmetric : ConstraintMode::full, eo);
      json j = to_json(r);
      j["target"] = mat_to_json(F);
      j["resolution"] = cfg.resolution;
      j["seed"] = s;
      sink.write("envelope.json", dump(j));
      return 0;
    }

    if (*check_cmd) {
      const std::uint64_t s = need_seed(cfg.seed, "check");
      const Density d = load_density(density_path);
      CheckOptions co;
      co.lp = lp;
      co.refine_iterations = cfg.refine_iters;
      CheckReport rep;
      rep.seed = s;
      rep.requested_samples = cfg.samples;
      auto take = [&](const CheckReport& r) {
        for (const auto& t : r.tests) rep.tests.push_back(t);
        rep.tolerances = r.tolerances;
      };
      const bool all = test == "all";
      std::optional<AtomDictionary> dict;
      auto get_dict = [&]() -> const AtomDictionary& {
        if (!dict) dict = sample_dictionary(d, cfg.resolution, s);
        return *dict;
      };
      if (all || test == "subadd") take(check_subadditivity(d, cfg.samples, s, co));
      if (all || test == "eta-convex") take(check_eta_convexity(d, cfg.samples, s, co));
      if (all || test == "bd-sym") take(check_bd_symmetry(d, cfg.samples, s, co));
      if (all || test == "bv") take(check_bv_ellipticity(d, cfg.samples, get_dict(), s, co));
      if (all || test == "bd") take(check_bd_ellipticity(d, cfg.samples, get_dict(), s, co));
      if (all || test == "constructions") {
        require(d.dimension() == 2, ErrorKind::dimension_mismatch,
                "--test constructions: density.dimension must be 2");
        const auto list = sample_constructions(d, cfg.samples, s, 0);
        auto r = check_construction_bounds(d, list, ks.empty() ? default_ks() : ks, co,
                                           cfg.quadrature_tol);
        take(r);
      }
      rep.tolerances["relative"] = co.tol;
      rep.tolerances["envelope_margin"] = co.envelope_margin;
      json j = to_json(rep);
      j["resolution"] = cfg.resolution;
      if (cfg.out_dir.empty()) {
        out << dump(j);
        err << summary_text(rep);
      } else {
        sink.write("check.json", dump(j));
        sink.write("summary.txt", summary_text(rep));
        out << summary_text(rep);
      }
      return rep.overall() == Verdict::violated ? 2 : 0;
    }

    if (*cons_cmd) {
      const Density d = load_density(density_path);
      const json p = read_json(params_path, "params");
      int kk = k.value_or(8);
      if (!k && p.contains("k")) {
        require(p["k"].is_number_integer(), ErrorKind::parse_error, "params.k: expected an integer");
        kk = p["k"].get<int>();
      }
      const auto c = construction_from_json(d, family, p, kk);
      const auto table_ks = ks.empty() ? default_ks() : ks;
      json j = {{"construction", construction_table(c, table_ks)},
                {"density", to_json(d)},
                {"field", c.field ? to_json(*c.field) : json(nullptr)}};
      if (c.field) {
        const auto e = total_energy(d, *c.field, cfg.quadrature_tol);
        j["field_energy"] = {{"total", e.total},
                             {"scaled", c.field_energy_scale * e.total},
                             {"quadrature_error_bound", e.quadrature_error_bound},
                             {"closed_form", c.closed_form(kk)}};
      }
      sink.write("construction.json", dump(j));
      if (!cfg.out_dir.empty()) {
        if (c.field) sink.write("field.json", dump(to_json(*c.field)));
        sink.write("table.csv", construction_csv(c, table_ks));
      }
      if (!csv_path.empty()) write_file(csv_path, construction_csv(c, table_ks), "--csv");
      if (!plot_path.empty()) {
        std::ostringstream os;
        os << std::setprecision(17) << "k,closed_form,limit";
        const auto names = c.breakdown(table_ks.front());
        for (const auto& t : names) os << ',' << t.name;
        os << '\n';
        for (int q : table_ks) {
          os << q << ',' << c.closed_form(q) << ',' << c.limit;
          for (const auto& t : c.breakdown(q)) os << ',' << t.total();
          os << '\n';
        }
        write_file(plot_path, os.str(), "--plot");
      }
      return 0;
    }

    if (*energy_cmd) {
      const Density d = load_density(density_path);
      json fj = read_json(field_path, "field");
      // Accept the output of 'construct' as well as a bare field.
      if (fj.is_object() && fj.contains("field") && !fj.contains("cells")) {
        require(!fj["field"].is_null(), ErrorKind::parse_error,
                "field: the construction carries no field");
        fj = fj["field"];
      }
      const auto f = field_from_json(fj);
      const auto e = total_energy(d, f, cfg.quadrature_tol);
      json j = to_json(e);
      j["admissible"] = f.admissible;
      j["quadrature_tol"] = cfg.quadrature_tol;
      sink.write("energy.json", dump(j));
      if (!cfg.out_dir.empty()) sink.write("edges.csv", energy_csv(e));
      if (!csv_path.empty()) write_file(csv_path, energy_csv(e), "--csv");
      return 0;
    }

    if (*dict_cmd) {
      const std::uint64_t s = need_seed(cfg.seed, "dict");
      const Density d = load_density(density_path);
      sink.write("dictionary.json", dump(to_json(sample_dictionary(d, cfg.resolution, s))));
      return 0;
    }

    if (*val_cmd) {
      const std::uint64_t s = need_seed(cfg.seed, "validate");
      const Density d = load_density(density_path, false);
      const auto rep = validate(d, std::max(cfg.samples, 1), s);
      json j = to_json(rep);
      j["density"] = to_json(d);
      sink.write("validation.json", dump(j));
      return rep.passes() ? 0 : 1;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace surfenv::cli
