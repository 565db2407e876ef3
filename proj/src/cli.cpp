#include "rollcard/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "rollcard/discrepancy.hpp"
#include "rollcard/errors.hpp"
#include "rollcard/format.hpp"
#include "rollcard/schema_export.hpp"
#include "rollcard/synth.hpp"
#include "rollcard/validator.hpp"
#include "rollcard/views.hpp"

namespace rollcard::cli {

namespace fs = std::filesystem;

namespace {

Carrier carrier_for(const std::string& path) {
  if (path.size() > 4 && path.ends_with(".zip")) return Carrier::zip(path);
  return Carrier::directory(path);
}

bool machine_output(const std::string& format_flag) {
  if (format_flag == "json") return true;
  if (format_flag == "text") return false;
  const char* env = std::getenv("ROLLCARD_FORMAT");
  return env && std::string(env) == "json";
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(sep, start);
    if (end == std::string::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

Json list_json(const std::vector<std::string>& items) {
  Json arr = Json::array();
  for (const std::string& item : items) arr.push_back(item);
  return arr;
}

Batch load_batch(const fs::path& dir) {
  if (!fs::exists(dir)) throw IoFailure("no such batch directory: " + dir.string());
  std::vector<fs::path> bundle_dirs;
  if (fs::exists(dir / "manifest.json")) {
    bundle_dirs.push_back(dir);
  } else {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) {
        bundle_dirs.push_back(entry.path());
      }
    }
    std::sort(bundle_dirs.begin(), bundle_dirs.end());
  }
  if (bundle_dirs.empty()) {
    throw IoFailure("no card bundles under " + dir.string());
  }
  Batch batch;
  for (const fs::path& bundle : bundle_dirs) {
    batch.push_back(read_bundle(Carrier::directory(bundle)));
  }
  return batch;
}

struct ParsedArgs {
  std::map<std::string, std::string> kv;
};

}  // namespace

ReportingRuleEntry parse_rule_spec(const std::string& spec) {
  std::string head = spec;
  std::string options;
  if (auto colon = spec.find(':'); colon != std::string::npos) {
    head = spec.substr(0, colon);
    options = spec.substr(colon + 1);
  }
  auto at = head.find('@');
  if (at == std::string::npos || at == 0 || at + 1 == head.size()) {
    throw MalformedRecord("rule spec needs name@version: " + spec);
  }
  std::string name = head.substr(0, at);
  std::string version = head.substr(at + 1);

  std::map<std::string, std::string> kv;
  if (!options.empty()) {
    for (const std::string& pair : split(options, ',')) {
      if (pair.empty()) continue;
      auto eq = pair.find('=');
      if (eq == std::string::npos) {
        throw MalformedRecord("rule option needs key=value: " + pair);
      }
      kv[pair.substr(0, eq)] = pair.substr(eq + 1);
    }
  }

  auto take = [&](const char* key, const std::string& fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::string value = it->second;
    kv.erase(it);
    return value;
  };

  // Policy: every branch explicit, defaults echoed below.
  std::string missing = take("missing", "fail");
  std::string error = take("error", "fail");
  std::string unparseable = take("unparseable", "fail");
  std::string group_filter = take("group_filter", "off");

  MissingArtifactPolicy missing_policy =
      missing == "fail"
          ? MissingArtifactPolicy::count_as_failure()
          : (missing == "exclude"
                 ? MissingArtifactPolicy::exclude_from_denominator()
                 : throw MalformedRecord("missing= takes fail|exclude"));
  ErrorStatusPolicy error_policy = ErrorStatusPolicy::count_as_failure();
  if (error == "fail") {
    error_policy = ErrorStatusPolicy::count_as_failure();
  } else if (error == "exclude") {
    error_policy = ErrorStatusPolicy::exclude_from_denominator();
  } else if (error == "propagate") {
    error_policy = ErrorStatusPolicy::propagate();
  } else if (error.starts_with("coerce")) {
    double value = 0.0;
    if (auto sep = error.find(':'); sep != std::string::npos) {
      value = std::stod(error.substr(sep + 1));
    }
    error_policy = ErrorStatusPolicy::coerce_to_fixed(value);
  } else {
    throw MalformedRecord("error= takes fail|exclude|coerce[:v]|propagate");
  }
  UnparseablePolicy unparseable_policy = UnparseablePolicy::count_as_failure();
  if (unparseable == "fail") {
    unparseable_policy = UnparseablePolicy::count_as_failure();
  } else if (unparseable == "skip") {
    unparseable_policy = UnparseablePolicy::mark_skipped();
  } else if (unparseable.starts_with("coerce")) {
    double value = 0.0;
    if (auto sep = unparseable.find(':'); sep != std::string::npos) {
      value = std::stod(unparseable.substr(sep + 1));
    }
    unparseable_policy = UnparseablePolicy::coerce_to_fixed(value);
  } else {
    throw MalformedRecord("unparseable= takes fail|coerce[:v]|skip");
  }
  GroupVarianceFilter variance =
      group_filter == "off"
          ? GroupVarianceFilter::Off
          : (group_filter == "drop_zero_variance"
                 ? GroupVarianceFilter::DropZeroVarianceGroups
                 : throw MalformedRecord(
                       "group_filter= takes off|drop_zero_variance"));

  Json config = Json::object();
  std::string input_view = "final_score";
  std::string output_target;
  if (name == "mean") {
    output_target = "mean_score";
  } else if (name == "threshold") {
    output_target = "pass_rate";
    config["tiers"] = list_json(split(
        take("tiers", "gold+silver+bronze+above_median+below"), '+'));
    config["passing_set"] = list_json(split(take("passing", "gold"), '+'));
  } else if (name == "judged") {
    output_target = "accuracy";
    std::string grader = take("grader", "rule_based");
    config["grader"] =
        grader == "judge_labels" ? "recorded_judge_labels" : grader;
    config["verdict_column"] = take("verdict", "verdict");
    config["normalization"] = "trim_casefold_collapse_whitespace";
  } else if (name == "trajectory") {
    output_target = "success_rate";
    config["success_definition"] = take("def", "db_state");
    input_view = "per_worker";
  } else {
    throw MalformedRecord("unknown rule name: " + name);
  }
  if (!kv.empty()) {
    throw MalformedRecord("unknown rule option: " + kv.begin()->first);
  }

  return ReportingRuleEntry{name,
                            version,
                            std::move(config),
                            input_view,
                            output_target,
                            FailurePolicy(missing_policy, error_policy,
                                          unparseable_policy, variance),
                            std::nullopt};
}

namespace {

int cmd_validate(const std::string& path, bool tolerant, bool as_json) {
  ValidationReport report = validate_bundle(
      carrier_for(path), tolerant ? Strictness::Tolerant : Strictness::Strict);
  if (as_json) {
    std::cout << dump_document(to_json(report));
  } else {
    std::cout << render_text(report);
  }
  return report.pass() ? kExitOk : kExitConformance;
}

int cmd_pack(const std::string& dir, const std::string& zip) {
  CardBundle card = read_bundle(Carrier::directory(dir));
  write_bundle(card, Carrier::zip(zip));
  std::cout << "packed " << dir << " -> " << zip << "\n";
  return kExitOk;
}

int cmd_unpack(const std::string& zip, const std::string& dir) {
  CardBundle card = read_bundle(Carrier::zip(zip));
  write_bundle(card, Carrier::directory(dir));
  std::cout << "unpacked " << zip << " -> " << dir << "\n";
  return kExitOk;
}

int cmd_inspect(const std::string& path, bool as_json) {
  CardBundle card = read_bundle(carrier_for(path));
  Json j = Json::object();
  j["run_id"] = card.manifest.run_id;
  j["format_version"] =
      Json::array({card.manifest.major, card.manifest.minor});
  j["created_at"] = card.manifest.created_at.text;
  Json counts = Json::object();
  counts["events"] = card.streams.events.size();
  counts["nodes"] = card.streams.nodes.size();
  counts["edges"] = card.streams.edges.size();
  counts["annotations"] = card.streams.annotations.size();
  counts["mutations"] = card.streams.mutations.size();
  j["row_counts"] = std::move(counts);
  j["blobs"] = card.blobs.size();
  j["release_scope"] = to_json(card.manifest.release_scope);
  Json registry = Json::array();
  for (const ReportingRuleEntry& entry : card.manifest.rule_registry) {
    registry.push_back(to_json(entry));
  }
  j["rule_registry"] = std::move(registry);
  if (as_json) {
    std::cout << dump_document(j);
  } else {
    std::cout << "run_id: " << card.manifest.run_id << "\n"
              << "format_version: " << card.manifest.major << "."
              << card.manifest.minor << "\n"
              << "created_at: " << card.manifest.created_at.text << "\n"
              << "rows: events=" << card.streams.events.size()
              << " nodes=" << card.streams.nodes.size()
              << " edges=" << card.streams.edges.size()
              << " annotations=" << card.streams.annotations.size()
              << " mutations=" << card.streams.mutations.size() << "\n"
              << "blobs: " << card.blobs.size() << "\n"
              << "release_scope: " << card.manifest.release_scope.kind << "\n"
              << "rules registered: " << card.manifest.rule_registry.size()
              << "\n";
    for (const ReportingRuleEntry& entry : card.manifest.rule_registry) {
      std::cout << "  " << entry.ref() << " -> " << entry.output_target << "\n";
    }
  }
  return kExitOk;
}

int cmd_project(const std::string& path, const std::string& view,
                const std::string& out, bool as_json) {
  CardBundle card = read_bundle(carrier_for(path));
  ViewTable table = project(card, ViewSpec::builtin_view(view));
  if (!out.empty()) {
    fs::create_directories(out);
    write_file(fs::path(out) / (view + ".table.jsonl"), serialize_table(table));
    write_file(fs::path(out) / (view + ".drops.json"),
               dump_document(to_json(table.provenance)));
    std::cout << "wrote " << out << "/" << view << ".table.jsonl and "
              << view << ".drops.json\n";
    return kExitOk;
  }
  if (as_json) {
    Json j = Json::object();
    j["view"] = view;
    Json rows = Json::array();
    for (const Record& row : table.rows) rows.push_back(row);
    j["rows"] = std::move(rows);
    j["drops"] = to_json(table.provenance);
    std::cout << dump_document(j);
  } else {
    std::cout << serialize_table(table);
    std::cout << "# rows: " << table.rows.size()
              << ", fields read: " << table.provenance.footprint.fields_read.size()
              << ", declared losses: " << table.provenance.declared_losses.size()
              << "\n";
  }
  return kExitOk;
}

std::map<std::string, Batch> resolve_batches(
    const std::string& fixture, const std::vector<std::string>& batch_args) {
  std::map<std::string, Batch> batches;
  if (!fixture.empty()) {
    NamedFixtureOutput named = gen_named(fixture);
    batches = std::move(named.batches);
  }
  for (const std::string& arg : batch_args) {
    auto eq = arg.find('=');
    if (eq == std::string::npos) {
      throw MalformedRecord("--batch takes label=path: " + arg);
    }
    batches[arg.substr(0, eq)] = load_batch(arg.substr(eq + 1));
  }
  if (batches.empty()) {
    throw MalformedRecord("nothing to score: give --fixture or --batch");
  }
  return batches;
}

int cmd_score(const std::string& path, const std::string& fixture,
              const std::string& batch_label, const std::string& rule_spec,
              bool as_json) {
  ReportingRuleEntry rule = parse_rule_spec(rule_spec);
  Batch batch;
  if (!fixture.empty()) {
    NamedFixtureOutput named = gen_named(fixture);
    std::string label = batch_label.empty() ? named.batches.begin()->first
                                            : batch_label;
    if (!named.batches.contains(label)) {
      throw MalformedRecord("fixture " + fixture + " has no batch " + label);
    }
    batch = std::move(named.batches.at(label));
  } else if (!path.empty()) {
    batch = load_batch(path);
  } else {
    throw MalformedRecord("nothing to score: give a batch path or --fixture");
  }
  ScoreReport report = score_rule(batch, rule);
  if (as_json) {
    std::cout << dump_document(to_json(report));
  } else {
    std::cout << render_line(report) << "\n";
  }
  return kExitOk;
}

int cmd_compare(const std::string& fixture,
                const std::vector<std::string>& batch_args,
                const std::vector<std::string>& rule_specs, bool as_json) {
  if (rule_specs.size() < 2) {
    throw MalformedRecord("compare needs at least two --rule entries");
  }
  std::vector<ReportingRuleEntry> rules;
  for (const std::string& spec : rule_specs) {
    rules.push_back(parse_rule_spec(spec));
  }
  std::map<std::string, Batch> batches = resolve_batches(fixture, batch_args);
  DiscrepancyReport report = compare(batches, rules, fixture);

  // When two batches are scored under a denominator-only rule pair, also
  // decompose the cross-system gap into convention vs behaviour shares.
  std::optional<GapDecomposition> decomposition;
  if (batches.size() == 2 && rules.size() == 2) {
    const Batch& a = batches.begin()->second;
    const Batch& b = std::next(batches.begin())->second;
    const ReportingRuleEntry* inclusive = nullptr;
    const ReportingRuleEntry* exclusive = nullptr;
    for (const ReportingRuleEntry& rule : rules) {
      if (rule.policy.on_missing_artifact.kind ==
          MissingArtifactPolicy::Kind::CountAsFailure) {
        inclusive = &rule;
      } else {
        exclusive = &rule;
      }
    }
    if (inclusive && exclusive &&
        inclusive->policy.differs_only_in_missing(exclusive->policy) &&
        inclusive->config == exclusive->config &&
        inclusive->name == exclusive->name) {
      decomposition = decompose_gap(a, b, *inclusive, *exclusive);
    }
  }

  if (as_json) {
    Json j = to_json(report);
    if (decomposition) {
      j["decomposition"] =
          Json{{"gap_inclusive", decomposition->gap_inclusive},
               {"gap_exclusive", decomposition->gap_exclusive},
               {"convention_share", decomposition->convention_share},
               {"gap_inclusive_pp", format_pp(decomposition->gap_inclusive)},
               {"gap_exclusive_pp", format_pp(decomposition->gap_exclusive)},
               {"convention_share_pp",
                format_pp(decomposition->convention_share)},
               {"missing_a", decomposition->missing_a},
               {"missing_b", decomposition->missing_b}};
    }
    std::cout << dump_document(j);
  } else {
    std::cout << render_table(report);
    if (report.systems.size() == 2) {
      for (const std::string& rule : report.rules) {
        double gap = report.cells.at({report.systems[0], rule}).headline -
                     report.cells.at({report.systems[1], rule}).headline;
        std::cout << "system_gap\t" << rule << "\t" << report.systems[0]
                  << " - " << report.systems[1] << "\t" << format_pp(gap)
                  << "pp\n";
      }
    }
    if (decomposition) {
      std::cout << "decomposition\tinclusive "
                << format_pp(decomposition->gap_inclusive) << "pp\texclusive "
                << format_pp(decomposition->gap_exclusive)
                << "pp\tconvention " << format_pp(decomposition->convention_share)
                << "pp\n";
    }
  }
  return kExitOk;
}

int cmd_gen(const std::string& fixture, const std::string& out,
            std::uint64_t seed, std::int64_t runs, const std::string& steps,
            const std::string& workers, const std::string& mix,
            double edge_density, const std::string& namespaces) {
  if (out.empty()) throw MalformedRecord("gen needs --out");
  if (!fixture.empty()) {
    NamedFixtureOutput named = gen_named(fixture);
    write_fixture(named, out);
    std::size_t cards = 0;
    for (const auto& [label, batch] : named.batches) {
      (void)label;
      cards += batch.size();
    }
    std::cout << "wrote fixture " << fixture << " (" << cards
              << " cards) to " << out << "\n";
    return kExitOk;
  }
  FixtureProfile profile;
  profile.seed = seed;
  profile.runs = runs;
  auto parse_range = [](const std::string& text) {
    auto parts = split(text, ':');
    if (parts.size() == 1) return std::pair{std::stoi(parts[0]), std::stoi(parts[0])};
    return std::pair{std::stoi(parts[0]), std::stoi(parts[1])};
  };
  profile.steps_per_run = parse_range(steps);
  profile.worker_count = parse_range(workers);
  if (!mix.empty()) {
    for (const std::string& pair : split(mix, ',')) {
      auto eq = pair.find('=');
      if (eq == std::string::npos) {
        throw MalformedRecord("--mix takes status=share,...: " + pair);
      }
      profile.failure_mix[pair.substr(0, eq)] = std::stod(pair.substr(eq + 1));
    }
  }
  if (!namespaces.empty()) profile.annotation_namespaces = split(namespaces, ',');
  profile.edge_density = edge_density;
  CardBundle card = gen_card(profile);
  write_bundle(card, carrier_for(out));
  std::cout << "wrote card " << card.manifest.run_id << " to " << out << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"rollout-card bundle toolkit"};
  app.require_subcommand(1);

  std::string format_flag;
  app.add_option("--format", format_flag, "text or json output")
      ->check(CLI::IsMember({"text", "json"}));

  // validate
  auto* validate = app.add_subcommand("validate", "check bundle conformance");
  std::string validate_path;
  bool tolerant = false;
  validate->add_option("path", validate_path)->required();
  validate->add_flag("--tolerant", tolerant,
                     "downgrade unknown-type payload findings to warnings");

  // pack / unpack
  auto* pack = app.add_subcommand("pack", "pack a directory bundle into a zip");
  std::string pack_dir, pack_zip;
  pack->add_option("dir", pack_dir)->required();
  pack->add_option("zip", pack_zip)->required();
  auto* unpack = app.add_subcommand("unpack", "unpack a zip bundle");
  std::string unpack_zip, unpack_dir;
  unpack->add_option("zip", unpack_zip)->required();
  unpack->add_option("dir", unpack_dir)->required();

  // inspect
  auto* inspect = app.add_subcommand("inspect", "manifest, stats, registry");
  std::string inspect_path;
  inspect->add_option("path", inspect_path)->required();

  // project
  auto* project_cmd = app.add_subcommand("project", "project a view");
  std::string project_path, project_view, project_out;
  project_cmd->add_option("path", project_path)->required();
  project_cmd->add_option("--view", project_view, "built-in view name")
      ->required();
  project_cmd->add_option("--out", project_out,
                          "write table + drops manifest under this directory");

  // score
  auto* score = app.add_subcommand("score", "score a batch under one rule");
  std::string score_path, score_fixture, score_batch, score_rule;
  score->add_option("path", score_path, "directory of card bundles");
  score->add_option("--fixture", score_fixture, "named fixture");
  score->add_option("--batch", score_batch, "fixture batch label");
  score->add_option("--rule", score_rule, "name@version:key=value,...")
      ->required();

  // compare
  auto* compare_cmd =
      app.add_subcommand("compare", "re-grade batches under several rules");
  std::string compare_fixture;
  std::vector<std::string> compare_batches, compare_rules;
  compare_cmd->add_option("--fixture", compare_fixture, "named fixture");
  compare_cmd->add_option("--batch", compare_batches, "label=path, repeatable");
  compare_cmd->add_option("--rule", compare_rules, "repeatable")->required();

  // gen
  auto* gen = app.add_subcommand("gen", "generate fixtures or profile cards");
  std::string gen_fixture, gen_out, gen_steps = "1:4", gen_workers = "1:2";
  std::string gen_mix, gen_namespaces;
  std::uint64_t gen_seed = 1;
  std::int64_t gen_runs = 1;
  double gen_edge_density = 0.5;
  gen->add_option("--fixture", gen_fixture, "named fixture");
  gen->add_option("--out", gen_out)->required();
  gen->add_option("--seed", gen_seed);
  gen->add_option("--runs", gen_runs);
  gen->add_option("--steps", gen_steps, "min:max steps per run");
  gen->add_option("--workers", gen_workers, "min:max workers per run");
  gen->add_option("--mix", gen_mix, "status=share,... failure mix");
  gen->add_option("--edge-density", gen_edge_density);
  gen->add_option("--namespaces", gen_namespaces, "comma-separated");

  // schema
  auto* schema = app.add_subcommand("schema", "emit the row-schema document");

  std::vector<const char*> argv;
  argv.push_back("rollcard");
  for (const std::string& arg : args) argv.push_back(arg.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  bool as_json = machine_output(format_flag);
  try {
    if (*validate) return cmd_validate(validate_path, tolerant, as_json);
    if (*pack) return cmd_pack(pack_dir, pack_zip);
    if (*unpack) return cmd_unpack(unpack_zip, unpack_dir);
    if (*inspect) return cmd_inspect(inspect_path, as_json);
    if (*project_cmd) {
      return cmd_project(project_path, project_view, project_out, as_json);
    }
    if (*score) {
      return cmd_score(score_path, score_fixture, score_batch, score_rule,
                       as_json);
    }
    if (*compare_cmd) {
      return cmd_compare(compare_fixture, compare_batches, compare_rules,
                         as_json);
    }
    if (*gen) {
      return cmd_gen(gen_fixture, gen_out, gen_seed, gen_runs, gen_steps,
                     gen_workers, gen_mix, gen_edge_density, gen_namespaces);
    }
    if (*schema) {
      std::cout << dump_document(export_row_schemas());
      return kExitOk;
    }
  } catch (const IoFailure& e) {
    std::cerr << "io failure: " << e.what() << "\n";
    return kExitIo;
  } catch (const MalformedRecord& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnknownFixture& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnknownDefectClass& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const MissingSourceField& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << e.code() << ": " << e.what() << "\n";
    return kExitConformance;
  }
  return kExitUsage;
}

}  // namespace rollcard::cli
