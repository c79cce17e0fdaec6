#include "tableforge/app/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "tableforge/app/corpus.hpp"
#include "tableforge/app/service.hpp"
#include "tableforge/error.hpp"
#include "tableforge/rng.hpp"
#include "tableforge/runner.hpp"
#include "tableforge/verifier.hpp"

#ifndef TABLEFORGE_DEFAULT_PROMPTS
#define TABLEFORGE_DEFAULT_PROMPTS "config/prompts.v1.json"
#endif

namespace tableforge::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Failure {
  int code;
  std::string message;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCategoryInapplicable: return kExitInfeasible;
    default: return kExitInput;
  }
}

json load_config(const std::string& flag_path) {
  std::string path = flag_path;
  if (path.empty()) {
    if (const char* env = std::getenv("TABLEFORGE_CONFIG")) path = env;
  }
  if (path.empty()) return json::object();
  std::ifstream f(path);
  if (!f) throw Failure{kExitInput, "cannot open config " + path};
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw Failure{kExitInput, "config " + path + ": " + e.what()};
  }
}

// Flag value when given, else the config entry, else the fallback.
template <class T>
T setting(const CLI::Option* flag, const T& flag_value, const json& config, const char* pointer, T fallback) {
  if (flag && flag->count() > 0) return flag_value;
  const json::json_pointer ptr(pointer);
  if (config.contains(ptr)) {
    try {
      return config.at(ptr).get<T>();
    } catch (const json::exception& e) {
      throw Failure{kExitInput, std::string("config ") + pointer + ": " + e.what()};
    }
  }
  return fallback;
}

std::string required(const std::string& value, const char* what) {
  if (value.empty()) throw Failure{kExitInput, std::string("missing ") + what};
  return value;
}

template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F&& body) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) body(k);
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1)); ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& t : pool) t.join();
}

// ---- render ----------------------------------------------------------------

struct RenderArgs {
  std::string specs, out;
  int scale = 1;
  bool fit = false;
  std::size_t jobs = 1;
  CLI::Option *specs_opt, *out_opt, *scale_opt, *fit_opt, *jobs_opt;
};

int cmd_render(const RenderArgs& a, const json& cfg, std::ostream& out, std::ostream& err) {
  const std::string specs = required(setting(a.specs_opt, a.specs, cfg, "/paths/specs", std::string()), "--specs");
  const std::string dir = required(setting(a.out_opt, a.out, cfg, "/paths/assets", std::string()), "--out");
  const int scale = setting(a.scale_opt, a.scale, cfg, "/render/scale", 1);
  const std::size_t jobs = setting(a.jobs_opt, a.jobs, cfg, "/jobs", std::size_t{1});
  LayoutMetrics metrics;
  try {
    if (cfg.contains("metrics")) metrics = metrics_from_json(cfg["metrics"]);
    if (a.fit_opt->count() > 0) metrics.fit_content = true;
    metrics.validate();
  } catch (const Error& e) {
    throw Failure{kExitInput, e.what()};
  }
  const auto files = spec_files(specs);
  fs::create_directories(dir);
  std::vector<std::string> errors(files.size());
  std::vector<std::string> written(files.size());
  parallel_for(files.size(), jobs, [&](std::size_t k) {
    try {
      const TableSpec spec = load_spec_file(files[k]);
      const RegionMap map = compute_layout(spec, metrics);
      const ImageDocument doc = render_image(spec, map, metrics);
      const auto png = encode_png(rasterize(doc, scale));
      const std::string stem = (fs::path(dir) / spec.table_id).string();
      write_text(stem + ".svg", doc.to_svg());
      write_text(stem + ".png", std::string(png.begin(), png.end()));
      write_text(stem + ".regions.json", to_json(map).dump(2) + "\n");
      written[k] = spec.table_id;
    } catch (const Error& e) {
      errors[k] = files[k] + ": " + e.what();
    }
  });
  int code = kExitOk;
  for (std::size_t k = 0; k < files.size(); ++k) {
    if (!errors[k].empty()) {
      err << errors[k] << "\n";
      code = kExitInput;
    } else {
      out << "rendered " << written[k] << "\n";
    }
  }
  return code;
}

// ---- forge -----------------------------------------------------------------

struct ForgeArgs {
  std::string specs, assets, out;
  std::vector<std::string> quotas;
  std::uint64_t seed = 0;
  double ratio = 0.8;
  int attempts = 64;
  CLI::Option *specs_opt, *assets_opt, *out_opt, *quota_opt, *seed_opt, *ratio_opt, *attempts_opt;
};

std::vector<std::pair<Category, std::size_t>> parse_quotas(const ForgeArgs& a, const json& cfg) {
  std::map<Category, std::size_t> q;
  auto put = [&](const std::string& name, long long n) {
    const auto c = parse_category(name);
    if (!c) throw Failure{kExitInput, "unknown category '" + name + "' in quota"};
    if (n < 0) throw Failure{kExitInput, "negative quota for " + name};
    q[*c] = static_cast<std::size_t>(n);
  };
  if (a.quota_opt->count() > 0) {
    for (const auto& item : a.quotas) {
      const auto eq = item.rfind('=');
      if (eq == std::string::npos) throw Failure{kExitInput, "quota '" + item + "' is not NAME=COUNT"};
      long long n = 0;
      try {
        n = std::stoll(item.substr(eq + 1));
      } catch (const std::exception&) {
        throw Failure{kExitInput, "quota '" + item + "' has a bad count"};
      }
      put(item.substr(0, eq), n);
    }
  } else if (cfg.contains("/synthesis/quotas"_json_pointer)) {
    for (const auto& [name, n] : cfg["synthesis"]["quotas"].items()) {
      if (!n.is_number_integer()) throw Failure{kExitInput, "quota for " + name + " is not an integer"};
      put(name, n.get<long long>());
    }
  }
  if (q.empty()) throw Failure{kExitInput, "no category quotas given"};
  return {q.begin(), q.end()};
}

int cmd_forge(const ForgeArgs& a, const json& cfg, std::ostream& out, std::ostream& err) {
  const std::string specs = required(setting(a.specs_opt, a.specs, cfg, "/paths/specs", std::string()), "--specs");
  const std::string assets = required(setting(a.assets_opt, a.assets, cfg, "/paths/assets", std::string()), "--assets");
  const std::string dir = required(setting(a.out_opt, a.out, cfg, "/paths/corpus", std::string()), "--out");
  if (a.seed_opt->count() == 0 && !cfg.contains("/synthesis/seed"_json_pointer)) {
    throw Failure{kExitInput, "a seed is required for synthesis (--seed or synthesis.seed)"};
  }
  const auto seed = setting(a.seed_opt, a.seed, cfg, "/synthesis/seed", std::uint64_t{0});
  const double ratio = setting(a.ratio_opt, a.ratio, cfg, "/split/ratio", 0.8);
  const int attempts = setting(a.attempts_opt, a.attempts, cfg, "/synthesis/attempts_per_instance", 64);
  const auto quotas = parse_quotas(a, cfg);

  Corpus corpus;
  corpus.dir = dir;
  corpus.specs = specs;
  corpus.assets = assets;
  corpus.tables = load_tables(specs, assets);
  if (corpus.tables.empty()) throw Failure{kExitInput, "no table specs under " + specs};
  std::vector<const TableAsset*> tables;
  for (const auto& [id, t] : corpus.tables) tables.push_back(&t);

  for (const auto& [category, quota] : quotas) {
    std::set<std::string> seen;
    std::map<std::string, std::size_t> per_table;
    std::set<std::string> inapplicable;
    std::size_t found = 0;
    const std::size_t budget = (quota + 1) * static_cast<std::size_t>(std::max(attempts, 1));
    const std::uint64_t base = seed ^ stable_hash(slug(category));
    for (std::size_t attempt = 0; found < quota && attempt < budget; ++attempt) {
      if (inapplicable.size() == tables.size()) break;
      const TableAsset& t = *tables[attempt % tables.size()];
      if (inapplicable.count(t.spec.table_id)) continue;
      TrajectoryInstance in;
      try {
        in = synthesize_instance(t, category, stable_hash(std::to_string(attempt), base));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kCategoryInapplicable) throw;
        inapplicable.insert(t.spec.table_id);
        continue;
      }
      if (!seen.insert(in.table_id + "\n" + in.question + "\n" + in.answer).second) continue;
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, "%04zu", per_table[in.table_id]++);
      in.id = in.table_id + "-" + std::string(slug(category)) + "-" + suffix;
      corpus.manifest.instances.push_back(std::move(in));
      ++found;
    }
    if (found < quota) {
      err << "quota for " << to_string(category) << " unfillable: " << found << " of " << quota
          << " distinct instances\n";
      return kExitInfeasible;
    }
  }
  if (corpus.manifest.instances.empty()) throw Failure{kExitInput, "all quotas are zero"};
  corpus.manifest = split_dataset(std::move(corpus.manifest), ratio, seed);
  corpus.meta = {{"seed", seed}, {"ratio", ratio}};
  save_corpus(corpus);
  const StatsReport stats = compute_stats(corpus.manifest, corpus.tables);
  write_text((fs::path(dir) / kStatsFile).string(), to_json(stats).dump(2) + "\n");
  out << "forged " << corpus.manifest.instances.size() << " instances into " << dir << "\n";
  return kExitOk;
}

// ---- verify ----------------------------------------------------------------

struct VerifyArgs {
  std::string corpus, specs, assets;
  double rate = 0.05;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  CLI::Option *corpus_opt, *specs_opt, *assets_opt, *rate_opt, *seed_opt, *jobs_opt;
};

int cmd_verify(const VerifyArgs& a, const json& cfg, std::ostream& out, std::ostream&) {
  const std::string dir = required(setting(a.corpus_opt, a.corpus, cfg, "/paths/corpus", std::string()), "--corpus");
  const Corpus c = load_corpus(dir, setting(a.specs_opt, a.specs, cfg, "/paths/specs", std::string()),
                               setting(a.assets_opt, a.assets, cfg, "/paths/assets", std::string()));
  const double rate = setting(a.rate_opt, a.rate, cfg, "/audit/rate", 0.05);
  const auto seed = setting(a.seed_opt, a.seed, cfg, "/audit/seed", std::uint64_t{0});
  const std::size_t jobs = setting(a.jobs_opt, a.jobs, cfg, "/jobs", std::size_t{1});
  const auto& instances = c.manifest.instances;
  for (const auto& in : instances) {
    if (!c.tables.count(in.table_id)) throw Failure{kExitInput, in.id + " refers to unknown table " + in.table_id};
  }
  std::vector<std::vector<Flag>> per(instances.size());
  parallel_for(instances.size(), jobs,
               [&](std::size_t k) { per[k] = verify_instance(instances[k], c.tables.at(instances[k].table_id)); });
  std::vector<Flag> flags;
  for (auto& f : per) flags.insert(flags.end(), f.begin(), f.end());
  write_flags((fs::path(dir) / kFlagsFile).string(), flags);
  std::vector<std::string> ids;
  for (const auto& in : instances) ids.push_back(in.id);
  const AuditSample sample = sample_audit(ids, rate, seed, flags);
  write_text((fs::path(dir) / kAuditSampleFile).string(),
             json{{"rate", rate}, {"seed", seed}, {"sampled", sample.sampled}, {"review", sample.ids}}.dump(2) + "\n");
  out << instances.size() << " instances checked, " << flags.size() << " flags, " << sample.ids.size()
      << " queued for review\n";
  return flags.empty() ? kExitOk : kExitFindings;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string corpus, specs, assets, out, mode = "two_stage", stage1 = "oracle", stage2 = "oracle", prompts,
                                         split = "test";
  int timeout_ms = 30000;
  int retries = 2;
  std::size_t jobs = 1;
  CLI::Option *corpus_opt, *specs_opt, *assets_opt, *out_opt, *mode_opt, *stage1_opt, *stage2_opt, *prompts_opt,
      *split_opt, *timeout_opt, *retries_opt, *jobs_opt;
};

std::unique_ptr<ModelBackend> make_backend(const std::string& spec, const Corpus& c, int timeout_ms, int retries) {
  if (spec == "oracle") return std::make_unique<OracleBackend>(c.manifest.instances, c.tables);
  if (spec.rfind("replay:", 0) == 0) return std::make_unique<ReplayBackend>(spec.substr(7));
  if (spec.rfind("remote:", 0) == 0) {
    RemoteConfig rc;
    std::string url = spec.substr(7);
    const auto scheme = url.find("://");
    const auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (slash != std::string::npos) {
      rc.path = url.substr(slash);
      url = url.substr(0, slash);
    }
    rc.url = url;
    rc.timeout_ms = timeout_ms;
    rc.retries = retries;
    return std::make_unique<RemoteBackend>(rc);
  }
  throw Failure{kExitInput, "unknown backend '" + spec + "' (oracle | replay:PATH | remote:URL)"};
}

int cmd_eval(const EvalArgs& a, const json& cfg, std::ostream& out, std::ostream&) {
  const std::string mode_name = setting(a.mode_opt, a.mode, cfg, "/eval/mode", std::string("two_stage"));
  const auto mode = parse_run_mode(mode_name);
  if (!mode) throw Failure{kExitInput, "unknown mode '" + mode_name + "' (two_stage | oracle | end_to_end)"};
  const std::string split = setting(a.split_opt, a.split, cfg, "/eval/split", std::string("test"));
  if (split != "test" && split != "train" && split != "all") throw Failure{kExitInput, "unknown split '" + split + "'"};
  const std::string dir = required(setting(a.corpus_opt, a.corpus, cfg, "/paths/corpus", std::string()), "--corpus");
  const std::string out_dir = setting(a.out_opt, a.out, cfg, "/paths/results", dir);
  const Corpus c = load_corpus(dir, setting(a.specs_opt, a.specs, cfg, "/paths/specs", std::string()),
                               setting(a.assets_opt, a.assets, cfg, "/paths/assets", std::string()));
  const Prompts prompts =
      load_prompts(setting(a.prompts_opt, a.prompts, cfg, "/eval/prompts", std::string(TABLEFORGE_DEFAULT_PROMPTS)));
  const int timeout_ms = setting(a.timeout_opt, a.timeout_ms, cfg, "/eval/timeout_ms", 30000);
  const int retries = setting(a.retries_opt, a.retries, cfg, "/eval/retries", 2);
  auto b1 = make_backend(setting(a.stage1_opt, a.stage1, cfg, "/eval/stage1", std::string("oracle")), c, timeout_ms,
                         retries);
  auto b2 = make_backend(setting(a.stage2_opt, a.stage2, cfg, "/eval/stage2", std::string("oracle")), c, timeout_ms,
                         retries);
  std::vector<TrajectoryInstance> chosen;
  for (const auto& in : c.manifest.instances) {
    auto it = c.manifest.split.find(in.id);
    const std::string s = it == c.manifest.split.end() ? "test" : std::string(to_string(it->second));
    if (split == "all" || split == s) chosen.push_back(in);
  }
  if (chosen.empty()) throw Failure{kExitInput, "no instances in split '" + split + "'"};
  RunOptions opts;
  opts.mode = *mode;
  opts.jobs = setting(a.jobs_opt, a.jobs, cfg, "/jobs", std::size_t{1});
  const RunResult r = run_pipeline(chosen, *b1, *b2, prompts, opts);
  fs::create_directories(out_dir);
  std::string results;
  std::string timing;
  for (const auto& rec : r.records) {
    results += to_json(rec, false).dump() + "\n";
    timing += json{{"id", rec.instance_id}, {"stage1_ms", rec.stage1_ms}, {"stage2_ms", rec.stage2_ms}}.dump() + "\n";
  }
  write_text((fs::path(out_dir) / "results.jsonl").string(), results);
  write_text((fs::path(out_dir) / "timing.jsonl").string(), timing);
  json report = {{"mode", mode_name}, {"split", split}, {"prompts_version", prompts.version},
                 {"accuracy", to_json(r.report)}};
  if (r.iou) report["iou"] = to_json(*r.iou);
  write_text((fs::path(out_dir) / "report.json").string(), report.dump(2) + "\n");
  out << "accuracy " << r.report.overall.correct << "/" << r.report.overall.total << " = " << r.report.overall.value()
      << "\n";
  return kExitOk;
}

// ---- stats -----------------------------------------------------------------

struct StatsArgs {
  std::string corpus, rows, specs, assets, out;
  CLI::Option *corpus_opt, *rows_opt, *specs_opt, *assets_opt, *out_opt;
};

Decimal decimal_field(const json& j, const char* key) {
  const json& v = j.at(key);
  const auto d = Decimal::parse(v.is_string() ? v.get<std::string>() : v.dump());
  if (!d) throw Failure{kExitInput, std::string("bad number for ") + key};
  return *d;
}

int cmd_stats(const StatsArgs& a, const json& cfg, std::ostream& out, std::ostream&) {
  StatsReport report;
  if (a.rows_opt->count() > 0) {
    std::ifstream f(a.rows);
    if (!f) throw Failure{kExitInput, "cannot open " + a.rows};
    std::vector<CategoryRow> rows;
    try {
      for (const auto& rj : json::parse(f)) {
        const auto c = parse_category(rj.at("category").get<std::string>());
        if (!c) throw Failure{kExitInput, "unknown category " + rj.at("category").dump()};
        rows.push_back({*c, rj.at("count").get<std::size_t>(), decimal_field(rj, "avg_bbox"),
                        decimal_field(rj, "avg_steps")});
      }
    } catch (const json::exception& e) {
      throw Failure{kExitInput, a.rows + ": " + e.what()};
    }
    report = compute_stats(rows);
  } else {
    const std::string dir = required(setting(a.corpus_opt, a.corpus, cfg, "/paths/corpus", std::string()),
                                     "--corpus or --rows");
    const Corpus c = load_corpus(dir, setting(a.specs_opt, a.specs, cfg, "/paths/specs", std::string()),
                                 setting(a.assets_opt, a.assets, cfg, "/paths/assets", std::string()));
    report = compute_stats(c.manifest, c.tables);
  }
  const std::string text = to_json(report).dump(2) + "\n";
  if (a.out_opt->count() > 0) write_text(a.out, text);
  out << text;
  return kExitOk;
}

// ---- serve -----------------------------------------------------------------

struct ServeArgs {
  std::string corpus, specs, assets, host = "127.0.0.1", ui;
  int port = 8080;
  CLI::Option *corpus_opt, *specs_opt, *assets_opt, *host_opt, *ui_opt, *port_opt;
};

int cmd_serve(const ServeArgs& a, const json& cfg, std::ostream& out, std::ostream& err) {
  const std::string dir = required(setting(a.corpus_opt, a.corpus, cfg, "/paths/corpus", std::string()), "--corpus");
  Corpus c = load_corpus(dir, setting(a.specs_opt, a.specs, cfg, "/paths/specs", std::string()),
                         setting(a.assets_opt, a.assets, cfg, "/paths/assets", std::string()));
  auto flags = read_flags((fs::path(dir) / kFlagsFile).string());
  const std::string host = setting(a.host_opt, a.host, cfg, "/service/host", std::string("127.0.0.1"));
  const int port = setting(a.port_opt, a.port, cfg, "/service/port", 8080);
  ReviewService service(std::move(c), std::move(flags), setting(a.ui_opt, a.ui, cfg, "/service/ui_dir", std::string()));
  if (!service.bind(host, port)) {
    err << "cannot bind " << host << ":" << port << "\n";
    return kExitService;
  }
  out << "serving " << dir << " on http://" << host << ":" << service.port() << "\n" << std::flush;
  service.run();
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trajectory-grounded table QA dataset builder"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON run config (default: $TABLEFORGE_CONFIG)");

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Render table specs to SVG, PNG and region maps");
  ra.specs_opt = render->add_option("--specs", ra.specs, "Spec file or directory");
  ra.out_opt = render->add_option("--out", ra.out, "Output directory");
  ra.scale_opt = render->add_option("--scale", ra.scale, "PNG pixel scale")->check(CLI::PositiveNumber);
  ra.fit_opt = render->add_flag("--fit-content", ra.fit, "Fit data column widths to their text");
  ra.jobs_opt = render->add_option("--jobs", ra.jobs, "Parallel workers");

  ForgeArgs fa;
  auto* forge = app.add_subcommand("forge", "Synthesize trajectory instances, split them and write stats");
  fa.specs_opt = forge->add_option("--specs", fa.specs, "Spec file or directory");
  fa.assets_opt = forge->add_option("--assets", fa.assets, "Directory written by render");
  fa.out_opt = forge->add_option("--out", fa.out, "Corpus directory");
  fa.quota_opt = forge->add_option("--quota", fa.quotas, "Category quota NAME=COUNT (repeatable)");
  fa.seed_opt = forge->add_option("--seed", fa.seed, "Synthesis seed");
  fa.ratio_opt = forge->add_option("--ratio", fa.ratio, "Train fraction");
  fa.attempts_opt = forge->add_option("--attempts", fa.attempts, "Draws allowed per requested instance");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Screen a corpus and write flags plus the audit sample");
  va.corpus_opt = verify->add_option("--corpus", va.corpus, "Corpus directory");
  va.specs_opt = verify->add_option("--specs", va.specs, "Override the recorded spec location");
  va.assets_opt = verify->add_option("--assets", va.assets, "Override the recorded asset location");
  va.rate_opt = verify->add_option("--audit-rate", va.rate, "Audit sampling rate");
  va.seed_opt = verify->add_option("--audit-seed", va.seed, "Audit sampling seed");
  va.jobs_opt = verify->add_option("--jobs", va.jobs, "Parallel workers");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Run the locate-then-reason pipeline and score it");
  ea.corpus_opt = eval->add_option("--corpus", ea.corpus, "Corpus directory");
  ea.specs_opt = eval->add_option("--specs", ea.specs, "Override the recorded spec location");
  ea.assets_opt = eval->add_option("--assets", ea.assets, "Override the recorded asset location");
  ea.out_opt = eval->add_option("--out", ea.out, "Results directory (default: corpus)");
  ea.mode_opt = eval->add_option("--mode", ea.mode, "two_stage | oracle | end_to_end");
  ea.stage1_opt = eval->add_option("--stage1", ea.stage1, "Stage-1 backend: oracle | replay:PATH | remote:URL");
  ea.stage2_opt = eval->add_option("--stage2", ea.stage2, "Stage-2 backend: oracle | replay:PATH | remote:URL");
  ea.prompts_opt = eval->add_option("--prompts", ea.prompts, "Prompt config file");
  ea.split_opt = eval->add_option("--split", ea.split, "test | train | all");
  ea.timeout_opt = eval->add_option("--timeout-ms", ea.timeout_ms, "Remote request timeout");
  ea.retries_opt = eval->add_option("--retries", ea.retries, "Remote retries after the first attempt");
  ea.jobs_opt = eval->add_option("--jobs", ea.jobs, "Concurrent instances");

  StatsArgs sa;
  auto* stats = app.add_subcommand("stats", "Complexity statistics of a corpus or of category rows");
  sa.corpus_opt = stats->add_option("--corpus", sa.corpus, "Corpus directory");
  sa.rows_opt = stats->add_option("--rows", sa.rows, "JSON array of {category, count, avg_bbox, avg_steps}");
  sa.specs_opt = stats->add_option("--specs", sa.specs, "Override the recorded spec location");
  sa.assets_opt = stats->add_option("--assets", sa.assets, "Override the recorded asset location");
  sa.out_opt = stats->add_option("--out", sa.out, "Also write the report here");

  ServeArgs va2;
  auto* serve = app.add_subcommand("serve", "Serve the review API and UI");
  va2.corpus_opt = serve->add_option("--corpus", va2.corpus, "Corpus directory");
  va2.specs_opt = serve->add_option("--specs", va2.specs, "Override the recorded spec location");
  va2.assets_opt = serve->add_option("--assets", va2.assets, "Override the recorded asset location");
  va2.host_opt = serve->add_option("--host", va2.host, "Bind address");
  va2.port_opt = serve->add_option("--port", va2.port, "Port");
  va2.ui_opt = serve->add_option("--ui", va2.ui, "Directory of built UI assets");

  std::vector<std::string> argv_store = {"tableforge"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    const json cfg = load_config(config_path);
    if (render->parsed()) return cmd_render(ra, cfg, out, err);
    if (forge->parsed()) return cmd_forge(fa, cfg, out, err);
    if (verify->parsed()) return cmd_verify(va, cfg, out, err);
    if (eval->parsed()) return cmd_eval(ea, cfg, out, err);
    if (stats->parsed()) return cmd_stats(sa, cfg, out, err);
    if (serve->parsed()) return cmd_serve(va2, cfg, out, err);
  } catch (const Failure& f) {
    err << "error: " << f.message << "\n";
    return f.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace tableforge::app
