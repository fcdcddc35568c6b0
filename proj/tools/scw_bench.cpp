// Benchmark front end: online runs, hyperparameter sweeps, synthetic data
// generation, manifest verification, and learning-curve extraction.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scw/scw.hpp"

namespace {

using nlohmann::json;

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const std::uint64_t lo = std::stoull(text.substr(0, dots));
    const std::uint64_t hi = std::stoull(text.substr(dots + 2));
    if (hi < lo) throw scw::ConfigError("bad seed range '" + text + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) seeds.push_back(std::stoull(tok));
  }
  if (seeds.empty()) throw scw::ConfigError("empty seed list '" + text + "'");
  return seeds;
}

std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> values;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    double v = 0.0;
    if (!scw::detail::parse_double(tok, v)) {
      throw scw::ConfigError("bad numeric value '" + tok + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw scw::ConfigError("empty value list '" + text + "'");
  return values;
}

scw::SyntheticSpec parse_synthetic_spec(const std::string& text) {
  scw::SyntheticSpec spec;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) {
      throw scw::ConfigError("bad synthetic spec token '" + tok + "' (want key=value)");
    }
    const std::string key = tok.substr(0, eq);
    const std::string value = tok.substr(eq + 1);
    if (key == "n") spec.n = std::stoull(value);
    else if (key == "d") spec.d = std::stoll(value);
    else if (key == "noise") spec.noise_rate = std::stod(value);
    else if (key == "seed") spec.seed = std::stoull(value);
    else throw scw::ConfigError("unknown synthetic spec key '" + key + "'");
  }
  spec.validate();
  return spec;
}

scw::LabelMapping parse_mapping(const std::string& text) {
  if (text.empty() || text == "auto") return scw::LabelMapping::auto_binary();
  if (text.rfind("1vsall:", 0) == 0 || text.rfind("onevsall:", 0) == 0) {
    return scw::LabelMapping::one_vs_all(std::stod(text.substr(text.find(':') + 1)));
  }
  if (text.rfind("pair:", 0) == 0) {
    const std::string rest = text.substr(5);
    const auto comma = rest.find(',');
    if (comma == std::string::npos) {
      throw scw::ConfigError("pair mapping needs two labels, e.g. pair:1,2");
    }
    return scw::LabelMapping::pair(std::stod(rest.substr(0, comma)),
                                   std::stod(rest.substr(comma + 1)));
  }
  throw scw::ConfigError("unknown label mapping '" + text + "'");
}

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

struct CommonOpts {
  std::string data_path;
  std::string synthetic_spec;
  std::string algos = "scw1";
  std::string cov = "auto";
  std::string seeds = "0..19";
  std::string mapping = "auto";
  std::string manifest;
  std::string grid_c, grid_eta, grid_r;
  std::string cv_seeds = "1000";
  int folds = 5;
  std::size_t stride = 200;
  unsigned jobs = 1;
  bool strict_timing = false;
  std::string out_csv, out_json;
  double c = 1.0, eta = 0.75, r = 1.0;
  bool sweep_first = false;
};

void add_dataset_options(CLI::App* cmd, CommonOpts& opt) {
  cmd->add_option("--data", opt.data_path, "LIBSVM file (.gz accepted)");
  cmd->add_option("--synthetic", opt.synthetic_spec,
                  "synthetic spec, e.g. n=5000,d=20,noise=0.1,seed=0");
  cmd->add_option("--mapping", opt.mapping, "label mapping: auto | 1vsall:<v> | pair:<a>,<b>");
  cmd->add_option("--manifest", opt.manifest, "manifest to verify --data against");
}

scw::Dataset load_input(const CommonOpts& opt) {
  if (!opt.data_path.empty() && !opt.synthetic_spec.empty()) {
    throw scw::ConfigError("--data and --synthetic are mutually exclusive");
  }
  if (!opt.synthetic_spec.empty()) {
    return scw::generate_synthetic(parse_synthetic_spec(opt.synthetic_spec));
  }
  if (opt.data_path.empty()) throw scw::ConfigError("need --data or --synthetic");
  if (!opt.manifest.empty()) {
    const auto entries = scw::load_manifest(opt.manifest);
    const std::string base =
        std::filesystem::path(opt.data_path).filename().string();
    for (const auto& e : entries) {
      if (e.file == base) {
        const std::string digest = scw::sha256_file(opt.data_path);
        if (digest != e.sha256) {
          throw scw::ConfigError("checksum mismatch for '" + opt.data_path + "': sha256 " +
                                 digest + " != manifest " + e.sha256);
        }
        std::cerr << "verified " << base << " against manifest\n";
        break;
      }
    }
  }
  return scw::load_libsvm_file(opt.data_path, parse_mapping(opt.mapping));
}

std::vector<scw::LearnerKind> parse_algos(const std::string& text) {
  std::vector<scw::LearnerKind> kinds;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) kinds.push_back(scw::parse_learner_kind(tok));
  }
  if (kinds.empty()) throw scw::ConfigError("empty algorithm list");
  return kinds;
}

scw::ParamGrid build_grid(const CommonOpts& opt) {
  scw::ParamGrid grid = scw::ParamGrid::paper_default();
  if (!opt.grid_c.empty()) grid.c_values = parse_value_list(opt.grid_c);
  if (!opt.grid_eta.empty()) grid.eta_values = parse_value_list(opt.grid_eta);
  if (!opt.grid_r.empty()) grid.r_values = parse_value_list(opt.grid_r);
  return grid;
}

void write_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw scw::ConfigError("cannot write '" + path + "'");
  out << content;
}

struct AlgoResult {
  scw::LearnerKind kind;
  scw::HyperParams params;
  std::vector<std::uint64_t> seeds;
  std::vector<scw::OnlineTrace> traces;
  scw::RunSummary summary;
};

int cmd_bench(CommonOpts& opt) {
  const scw::Dataset dataset = load_input(opt);
  const auto kinds = parse_algos(opt.algos);
  const auto seeds = parse_seed_list(opt.seeds);
  if (opt.strict_timing) opt.jobs = 1;

  std::vector<AlgoResult> results;
  for (const auto kind : kinds) {
    AlgoResult res;
    res.kind = kind;
    res.seeds = seeds;
    if (opt.sweep_first) {
      const auto sweep = scw::cross_validate(kind, dataset, build_grid(opt), opt.folds,
                                             parse_seed_list(opt.cv_seeds), opt.cov,
                                             opt.jobs);
      res.params = sweep.best().params;
      std::cerr << "sweep " << scw::to_string(kind) << ": best c=" << res.params.c
                << " eta=" << res.params.eta << " r=" << res.params.r
                << " (validation rate " << fmt("%.4f", sweep.best().mean_rate) << ")\n";
    } else {
      res.params = scw::HyperParams::make(opt.c, opt.eta, opt.r);
    }

    const scw::CovMode mode = scw::resolve_cov_mode(kind, dataset.dim, opt.cov);
    res.traces.resize(seeds.size());
    scw::parallel_for(seeds.size(), opt.jobs, [&](std::size_t i) {
      const scw::Dataset stream = scw::permute(dataset, seeds[i]);
      res.traces[i] = scw::run_online(kind, res.params, stream, {opt.stride, mode});
    });
    if (seeds.size() >= 2) res.summary = scw::aggregate_runs(res.traces);
    results.push_back(std::move(res));
  }

  // Table-style summary, one row per algorithm.
  std::printf("dataset: %s  (n=%zu, d=%td)  seeds: %zu\n", dataset.name.c_str(),
              dataset.size(), static_cast<std::ptrdiff_t>(dataset.dim), seeds.size());
  std::printf("%-11s %-19s %-21s %s\n", "algorithm", "mistake-rate", "updates", "time(s)");
  for (const auto& res : results) {
    if (res.traces.size() >= 2) {
      std::printf("%-11s %.4f ± %.4f     %.1f ± %.1f %*s %.4f ± %.4f\n",
                  scw::to_string(res.kind).c_str(), res.summary.mistake_rate.mean,
                  res.summary.mistake_rate.std, res.summary.updates.mean,
                  res.summary.updates.std, 4, "", res.summary.seconds.mean,
                  res.summary.seconds.std);
    } else {
      const auto& t = res.traces.front();
      std::printf("%-11s %.4f              %llu %*s %.4f\n",
                  scw::to_string(res.kind).c_str(), t.final_mistake_rate,
                  static_cast<unsigned long long>(t.update_count), 12, "",
                  t.elapsed_seconds);
    }
  }

  if (!opt.out_csv.empty()) {
    std::ostringstream csv;
    csv << "dataset,algo,param_c,param_eta,param_r,seed,mistake_rate,updates,seconds,"
           "cum_alpha2v\n";
    for (const auto& res : results) {
      for (std::size_t i = 0; i < res.traces.size(); ++i) {
        const auto& t = res.traces[i];
        csv << dataset.name << ',' << scw::to_string(res.kind) << ','
            << fmt("%.10g", res.params.c) << ',' << fmt("%.10g", res.params.eta) << ','
            << fmt("%.10g", res.params.r) << ',' << res.seeds[i] << ','
            << fmt("%.12g", t.final_mistake_rate) << ',' << t.update_count << ','
            << fmt("%.6f", t.elapsed_seconds) << ',' << fmt("%.12g", t.cum_alpha2v)
            << '\n';
      }
    }
    write_file(opt.out_csv, csv.str());
  }

  if (!opt.out_json.empty()) {
    json report;
    report["dataset"] = {{"name", dataset.name},
                         {"n", dataset.size()},
                         {"d", dataset.dim}};
    report["stride"] = opt.stride;
    report["algorithms"] = json::array();
    for (const auto& res : results) {
      json algo;
      algo["algo"] = scw::to_string(res.kind);
      algo["params"] = {{"c", res.params.c}, {"eta", res.params.eta}, {"r", res.params.r}};
      algo["runs"] = json::array();
      for (std::size_t i = 0; i < res.traces.size(); ++i) {
        const auto& t = res.traces[i];
        json run;
        run["seed"] = res.seeds[i];
        run["mistake_rate"] = t.final_mistake_rate;
        run["updates"] = t.update_count;
        run["seconds"] = t.elapsed_seconds;
        run["cum_alpha2v"] = t.cum_alpha2v;
        run["clamp_events"] = t.clamp_events;
        json curve;
        curve["t"] = json::array();
        curve["cum_mistakes"] = json::array();
        curve["cum_updates"] = json::array();
        curve["elapsed"] = json::array();
        for (const auto& p : t.curve) {
          curve["t"].push_back(p.t);
          curve["cum_mistakes"].push_back(p.cum_mistakes);
          curve["cum_updates"].push_back(p.cum_updates);
          curve["elapsed"].push_back(p.elapsed_seconds);
        }
        run["curve"] = std::move(curve);
        algo["runs"].push_back(std::move(run));
      }
      if (res.traces.size() >= 2) {
        algo["summary"] = {
            {"mistake_rate",
             {{"mean", res.summary.mistake_rate.mean}, {"std", res.summary.mistake_rate.std}}},
            {"updates", {{"mean", res.summary.updates.mean}, {"std", res.summary.updates.std}}},
            {"seconds", {{"mean", res.summary.seconds.mean}, {"std", res.summary.seconds.std}}}};
      }
      report["algorithms"].push_back(std::move(algo));
    }
    write_file(opt.out_json, report.dump(2) + "\n");
  }
  return 0;
}

int cmd_sweep(CommonOpts& opt) {
  const scw::Dataset dataset = load_input(opt);
  const auto kinds = parse_algos(opt.algos);
  const scw::ParamGrid grid = build_grid(opt);

  std::ostringstream csv;
  csv << "dataset,algo,param_c,param_eta,param_r,mean_rate,std_rate,selected\n";
  for (const auto kind : kinds) {
    const auto sweep = scw::cross_validate(kind, dataset, grid, opt.folds,
                                           parse_seed_list(opt.cv_seeds), opt.cov, opt.jobs);
    const auto& best = sweep.best();
    std::printf("%s: best c=%g eta=%g r=%g  validation mistake rate %.4f\n",
                scw::to_string(kind).c_str(), best.params.c, best.params.eta,
                best.params.r, best.mean_rate);
    for (std::size_t i = 0; i < sweep.cells.size(); ++i) {
      const auto& cell = sweep.cells[i];
      csv << dataset.name << ',' << scw::to_string(kind) << ','
          << fmt("%.10g", cell.params.c) << ',' << fmt("%.10g", cell.params.eta) << ','
          << fmt("%.10g", cell.params.r) << ',' << fmt("%.12g", cell.mean_rate) << ','
          << fmt("%.12g", cell.std_rate) << ',' << (i == sweep.best_index ? 1 : 0)
          << '\n';
    }
  }
  if (!opt.out_csv.empty()) write_file(opt.out_csv, csv.str());
  return 0;
}

int cmd_curves(const std::string& report_path, const std::string& out_csv) {
  std::ifstream in(report_path);
  if (!in) throw scw::ConfigError("cannot open report '" + report_path + "'");
  json report;
  try {
    in >> report;
  } catch (const json::exception& e) {
    throw scw::ConfigError("malformed report '" + report_path + "': " + e.what());
  }
  std::ostringstream csv;
  csv << "algo,seed,t,cum_mistake_rate,cum_updates,elapsed\n";
  try {
    for (const auto& algo : report.at("algorithms")) {
      const std::string name = algo.at("algo");
      for (const auto& run : algo.at("runs")) {
        const std::uint64_t seed = run.at("seed");
        const auto& curve = run.at("curve");
        const auto& ts = curve.at("t");
        const auto& mistakes = curve.at("cum_mistakes");
        const auto& updates = curve.at("cum_updates");
        const auto& elapsed = curve.at("elapsed");
        for (std::size_t i = 0; i < ts.size(); ++i) {
          const double t = ts[i];
          csv << name << ',' << seed << ',' << ts[i].get<std::uint64_t>() << ','
              << fmt("%.12g", mistakes[i].get<double>() / t) << ','
              << updates[i].get<std::uint64_t>() << ','
              << fmt("%.6f", elapsed[i].get<double>()) << '\n';
        }
      }
    }
  } catch (const json::exception& e) {
    throw scw::ConfigError("malformed report '" + report_path + "': " + e.what());
  }
  if (out_csv.empty()) {
    std::cout << csv.str();
  } else {
    write_file(out_csv, csv.str());
  }
  return 0;
}

int cmd_synth(const scw::SyntheticSpec& spec, const std::string& out_path) {
  const scw::Dataset ds = scw::generate_synthetic(spec);
  std::ostringstream text;
  scw::serialize_libsvm(ds, text);
  if (out_path.empty()) {
    std::cout << text.str();
  } else {
    write_file(out_path, text.str());
    std::cerr << "wrote " << ds.size() << " examples (d=" << ds.dim << ") to " << out_path
              << "\n";
  }
  return 0;
}

int cmd_verify(const std::string& manifest_path, const std::string& data_dir) {
  const auto entries = scw::load_manifest(manifest_path);
  const auto results = scw::verify_manifest(entries, data_dir);
  bool all_ok = true;
  for (const auto& r : results) {
    const char* status = r.status == scw::VerifyResult::Status::Ok        ? "ok      "
                         : r.status == scw::VerifyResult::Status::Missing ? "missing "
                                                                          : "mismatch";
    std::printf("%s %-12s %s\n", status, r.name.c_str(), r.detail.c_str());
    all_ok = all_ok && r.status == scw::VerifyResult::Status::Ok;
  }
  if (!all_ok) throw scw::ConfigError("manifest verification failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft confidence-weighted online learning benchmark"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI file (flags override)");

  CommonOpts opt;

  auto* bench = app.add_subcommand("bench", "run the online protocol over seeds");
  add_dataset_options(bench, opt);
  bench->add_option("--algos", opt.algos, "comma-separated algorithm list");
  bench->add_option("--cov", opt.cov, "covariance mode: full | diag | auto");
  bench->add_option("--seeds", opt.seeds, "permutation seeds, e.g. 0..19 or 0,3,7");
  bench->add_option("--stride", opt.stride, "curve sample count per run");
  bench->add_option("--jobs", opt.jobs, "max concurrent runs");
  bench->add_flag("--strict-timing", opt.strict_timing, "force serial runs for clean timing");
  bench->add_option("--out-csv", opt.out_csv, "per-run results CSV path");
  bench->add_option("--out-json", opt.out_json, "JSON report path (with curves)");
  bench->add_option("--c", opt.c, "C parameter");
  bench->add_option("--eta", opt.eta, "eta parameter in (0.5, 1)");
  bench->add_option("--r", opt.r, "AROW r parameter");
  bench->add_flag("--sweep", opt.sweep_first, "cross-validate parameters first");
  bench->add_option("--grid-c", opt.grid_c, "C grid for --sweep (comma list)");
  bench->add_option("--grid-eta", opt.grid_eta, "eta grid for --sweep");
  bench->add_option("--grid-r", opt.grid_r, "r grid for --sweep");
  bench->add_option("--folds", opt.folds, "cross-validation folds");
  bench->add_option("--cv-seeds", opt.cv_seeds, "validation permutation seeds");

  auto* sweep = app.add_subcommand("sweep", "cross-validate hyperparameters");
  add_dataset_options(sweep, opt);
  sweep->add_option("--algos", opt.algos, "comma-separated algorithm list");
  sweep->add_option("--cov", opt.cov, "covariance mode: full | diag | auto");
  sweep->add_option("--grid-c", opt.grid_c, "C grid (comma list; default 2^-4..2^4)");
  sweep->add_option("--grid-eta", opt.grid_eta, "eta grid (default 0.55..0.95)");
  sweep->add_option("--grid-r", opt.grid_r, "r grid (default 2^-4..2^4)");
  sweep->add_option("--folds", opt.folds, "cross-validation folds");
  sweep->add_option("--cv-seeds", opt.cv_seeds, "validation permutation seeds");
  sweep->add_option("--jobs", opt.jobs, "max concurrent cells");
  sweep->add_option("--out-csv", opt.out_csv, "sweep results CSV path");

  std::string report_path, curves_out;
  auto* curves = app.add_subcommand("curves", "flatten a JSON report into curve CSV");
  curves->add_option("--report", report_path, "report written by bench --out-json")
      ->required();
  curves->add_option("--out-csv", curves_out, "output CSV (stdout when omitted)");

  scw::SyntheticSpec synth_spec;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset as LIBSVM text");
  synth->add_option("--n", synth_spec.n, "example count");
  synth->add_option("--d", synth_spec.d, "dimension (>= 2)");
  synth->add_option("--noise", synth_spec.noise_rate, "label flip probability [0, 0.5)");
  synth->add_option("--seed", synth_spec.seed, "generator seed");
  synth->add_option("--out", synth_out, "output path (stdout when omitted)");

  std::string verify_manifest_path, verify_dir = ".";
  auto* verify = app.add_subcommand("verify", "check dataset checksums against a manifest");
  verify->add_option("--manifest", verify_manifest_path, "manifest file")->required();
  verify->add_option("--data-dir", verify_dir, "directory holding the dataset files");

  try {
    app.parse(argc, argv);
    if (bench->parsed()) return cmd_bench(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
    if (curves->parsed()) return cmd_curves(report_path, curves_out);
    if (synth->parsed()) return cmd_synth(synth_spec, synth_out);
    if (verify->parsed()) return cmd_verify(verify_manifest_path, verify_dir);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const scw::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 1;
  } catch (const scw::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
