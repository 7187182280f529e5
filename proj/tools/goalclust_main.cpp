// goalclust: goal-driven, explainable text clustering.
//
// Subcommands: cluster (full propose/assign/select run), taxonomy (recursive
// runs), eval (metrics against reference labels), solve (standalone
// selection instances), synth (deterministic benchmark corpora).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "goalclust/assign.hpp"
#include "goalclust/backend.hpp"
#include "goalclust/core.hpp"
#include "goalclust/eval.hpp"
#include "goalclust/http_backend.hpp"
#include "goalclust/oracle.hpp"
#include "goalclust/pipeline.hpp"
#include "goalclust/propose.hpp"
#include "goalclust/select.hpp"
#include "goalclust/synthio.hpp"

namespace gc = goalclust;

namespace {

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gc::IoError("cannot read file: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw gc::ParseError("malformed JSON: " + path);
  return j;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw gc::IoError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

// Backend specs: "oracle", "oracle:merged", "oracle:full", "script:<file>",
// "http:<model>@<url>", and "deterministic" (committer only).
std::unique_ptr<gc::Backend> make_backend(const std::string& spec, const std::string& role) {
  if (spec == "deterministic") {
    if (role != "committer") {
      throw gc::ValidationError("backend spec \"deterministic\" is only valid for the committer");
    }
    return nullptr;
  }
  if (spec == "oracle" || spec.rfind("oracle:", 0) == 0) {
    if (role == "assigner") return std::make_unique<gc::OracleAssigner>();
    if (role == "committer") return std::make_unique<gc::OracleCommitter>();
    gc::OracleDistractors distractors = gc::OracleDistractors::kNone;
    if (spec == "oracle:merged") distractors = gc::OracleDistractors::kMerged;
    if (spec == "oracle:full") distractors = gc::OracleDistractors::kMergedPartial;
    return std::make_unique<gc::OracleProposer>(distractors);
  }
  if (spec.rfind("script:", 0) == 0) {
    nlohmann::json list = load_json_file(spec.substr(7));
    if (!list.is_array()) throw gc::ValidationError("script backend file must be a JSON array");
    std::vector<std::string> responses;
    for (const auto& item : list) responses.push_back(item.get<std::string>());
    return std::make_unique<gc::FixedScriptBackend>(std::move(responses), role + "-script");
  }
  if (spec.rfind("http:", 0) == 0) {
    std::string rest = spec.substr(5);
    std::size_t at = rest.find('@');
    if (at == std::string::npos) {
      throw gc::ValidationError("http backend spec must be http:<model>@<url>");
    }
    return std::make_unique<gc::HttpChatBackend>(rest.substr(0, at), rest.substr(at + 1));
  }
  throw gc::ValidationError("unknown backend spec: " + spec);
}

struct CommonFlags {
  std::string proposer = "oracle:full";
  std::string assigner = "oracle";
  std::string committer = "deterministic";
  bool audit = false;
  std::string audit_file;
  std::string cache_path;
  std::uint64_t max_calls = 0;
  int parallel = static_cast<int>(std::thread::hardware_concurrency());
  std::uint64_t seed = 0;

  // --audit writes into the run directory unless --audit-file overrides it
  std::string resolved_audit(const std::string& out_dir) const {
    if (!audit_file.empty()) return audit_file;
    if (audit) return (std::filesystem::path(out_dir) / "audit.jsonl").string();
    return {};
  }
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--proposer", flags.proposer,
                  "proposer backend spec (oracle[:merged|:full], script:<file>, http:<model>@<url>)")
      ->capture_default_str();
  cmd->add_option("--assigner", flags.assigner, "assigner backend spec")->capture_default_str();
  cmd->add_option("--committer", flags.committer,
                  "committer backend spec, or \"deterministic\"")
      ->capture_default_str();
  cmd->add_flag("--audit", flags.audit, "log all backend calls to <out>/audit.jsonl");
  cmd->add_option("--audit-file", flags.audit_file, "log backend calls to this JSONL file");
  cmd->add_option("--cache", flags.cache_path, "persistent assigner judgment cache (JSONL)");
  cmd->add_option("--max-calls", flags.max_calls, "abort after this many backend calls (0 = off)");
  cmd->add_option("--parallel", flags.parallel, "concurrent backend requests")
      ->capture_default_str();
  cmd->add_option("--seed", flags.seed, "run seed")->capture_default_str();
}

struct BackendSet {
  std::unique_ptr<gc::Backend> proposer;
  std::unique_ptr<gc::Backend> assigner;
  std::unique_ptr<gc::Backend> committer;
  std::shared_ptr<gc::AuditLog> audit;
  std::shared_ptr<gc::CallBudget> budget;

  gc::PipelineBackends pipeline() const {
    return gc::PipelineBackends{proposer.get(), assigner.get(), committer.get()};
  }

  std::map<std::string, std::string> ids() const {
    std::map<std::string, std::string> out;
    if (proposer) out["proposer"] = proposer->id_string();
    if (assigner) out["assigner"] = assigner->id_string();
    out["committer"] = committer ? committer->id_string() : "deterministic";
    return out;
  }
};

BackendSet make_backends(const CommonFlags& flags, const std::string& audit_path) {
  BackendSet set;
  set.proposer = make_backend(flags.proposer, "proposer");
  set.assigner = make_backend(flags.assigner, "assigner");
  set.committer = make_backend(flags.committer, "committer");
  if (!audit_path.empty()) set.audit = std::make_shared<gc::AuditLog>(audit_path);
  if (flags.max_calls > 0) set.budget = std::make_shared<gc::CallBudget>(flags.max_calls);
  for (gc::Backend* b : {set.proposer.get(), set.assigner.get(), set.committer.get()}) {
    if (!b) continue;
    if (set.audit) b->attach_audit(set.audit);
    if (set.budget) b->attach_budget(set.budget);
  }
  return set;
}

gc::ReferenceLabels load_refs(const std::vector<gc::Sample>& corpus, const std::string& label_attr) {
  return label_attr.empty() ? gc::reference_from_labels(corpus)
                            : gc::reference_from_attr(corpus, label_attr);
}

int run_cluster(const CommonFlags& flags, const std::string& corpus_path, const std::string& goal,
                int k, double lambda, int j_total, int j_per_prompt, int iterations, int budget,
                const std::string& template_name, const std::string& template_file, bool do_commit,
                const std::string& out_dir, const std::string& label_attr) {
  gc::ClusteringTask task;
  task.corpus = gc::load_corpus(corpus_path);
  task.goal = goal;
  task.k = k;
  task.lambda = lambda;
  task.j_total = j_total;
  task.j_per_prompt = j_per_prompt;
  task.iterations = iterations;
  task.context_budget = budget;
  task.seed = flags.seed;
  gc::validated(task);

  std::filesystem::create_directories(out_dir);
  BackendSet backends = make_backends(flags, flags.resolved_audit(out_dir));
  gc::RunOptions options;
  options.parallelism = std::max(1, flags.parallel);
  options.propose.tmpl = template_file.empty()
                             ? gc::PromptTemplate::builtin(template_name == "detailed"
                                                               ? gc::TemplateKind::kDetailed
                                                               : gc::TemplateKind::kSimple)
                             : gc::PromptTemplate::from_file(template_file);
  gc::JudgmentCache file_cache =
      flags.cache_path.empty() ? gc::JudgmentCache() : gc::JudgmentCache(flags.cache_path);
  options.cache = &file_cache;

  gc::RunResult result = gc::run_clustering(task, backends.pipeline(), options);
  if (do_commit) {
    result.clusters = gc::commit(result.clusters, result.matrix, result.selection, task.corpus,
                                 backends.committer.get());
  }

  gc::ReferenceLabels refs = load_refs(task.corpus, label_attr);
  std::unique_ptr<nlohmann::json> metrics;
  if (!refs.classes.empty()) {
    metrics = std::make_unique<nlohmann::json>(
        gc::metrics_report(result.clusters, task.corpus, refs, &result.matrix, &result.selection));
  }
  gc::save_artifacts(out_dir, task, result, backends.ids(), nullptr, metrics.get());

  std::cout << "clusters: " << result.clusters.clusters.size()
            << "  objective: " << result.selection.objective
            << "  uncovered: " << result.clusters.uncovered.size() << "\n";
  for (const gc::Cluster& cluster : result.clusters.clusters) {
    std::cout << "  [" << cluster.members.size() << "] " << cluster.explanation.text << "\n";
  }
  if (metrics && metrics->contains("macro_f1")) {
    std::cout << "macro F1: " << (*metrics)["macro_f1"].get<double>() << "\n";
  }
  std::cout << "artifacts: " << out_dir << "\n";
  return 0;
}

int run_taxonomy(const CommonFlags& flags, const std::string& corpus_path, const std::string& goal,
                 int k, double lambda, int j_total, int j_per_prompt, int iterations, int budget,
                 const std::string& template_name, const std::string& template_file, int max_depth,
                 int split_threshold, const std::string& out_dir) {
  gc::ClusteringTask task;
  task.corpus = gc::load_corpus(corpus_path);
  task.goal = goal;
  task.k = k;
  task.lambda = lambda;
  task.j_total = j_total;
  task.j_per_prompt = j_per_prompt;
  task.iterations = iterations;
  task.context_budget = budget;
  task.seed = flags.seed;
  gc::validated(task);

  std::filesystem::create_directories(out_dir);
  BackendSet backends = make_backends(flags, flags.resolved_audit(out_dir));
  gc::RunOptions options;
  options.parallelism = std::max(1, flags.parallel);
  options.propose.tmpl = template_file.empty()
                             ? gc::PromptTemplate::builtin(template_name == "detailed"
                                                               ? gc::TemplateKind::kDetailed
                                                               : gc::TemplateKind::kSimple)
                             : gc::PromptTemplate::from_file(template_file);
  gc::JudgmentCache file_cache =
      flags.cache_path.empty() ? gc::JudgmentCache() : gc::JudgmentCache(flags.cache_path);
  options.cache = &file_cache;

  gc::TaxonomyNode root = gc::build_taxonomy(task, backends.pipeline(), max_depth, split_threshold,
                                             options);
  write_json_file((std::filesystem::path(out_dir) / "taxonomy.json").string(),
                  gc::taxonomy_to_json(root));
  std::string rendering = gc::render_taxonomy_text(root);
  std::ofstream txt(std::filesystem::path(out_dir) / "taxonomy.txt");
  txt << rendering;
  std::cout << rendering;
  return 0;
}

int run_eval(const std::string& clusters_path, const std::string& corpus_path,
             const std::string& label_attr, const std::string& matrix_path,
             const std::string& selection_path, const std::string& mask_path,
             const std::string& out_path) {
  gc::ClusterSet clusters = gc::clusters_from_json(load_json_file(clusters_path));
  std::vector<gc::Sample> corpus = gc::load_corpus(corpus_path);
  gc::ReferenceLabels refs = load_refs(corpus, label_attr);
  if (!mask_path.empty()) {
    nlohmann::json mask_json = load_json_file(mask_path);
    std::set<std::string> mask;
    for (const auto& id : mask_json.at("eval_ids")) mask.insert(id.get<std::string>());
    for (auto& [id, members] : refs.classes) {
      std::set<std::string> kept;
      for (const std::string& sid : members) {
        if (mask.count(sid)) kept.insert(sid);
      }
      members = std::move(kept);
    }
    std::erase_if(refs.classes, [](const auto& entry) { return entry.second.empty(); });
  }

  std::unique_ptr<gc::AssignmentMatrix> matrix;
  std::unique_ptr<gc::SelectionSolution> selection;
  if (!matrix_path.empty()) {
    matrix = std::make_unique<gc::AssignmentMatrix>(gc::matrix_from_json(load_json_file(matrix_path)));
  }
  if (!selection_path.empty()) {
    nlohmann::json j = load_json_file(selection_path);
    selection = std::make_unique<gc::SelectionSolution>();
    for (const auto& bit : j.at("selected")) {
      selection->selected.push_back(static_cast<std::uint8_t>(bit.get<int>()));
    }
  }
  // Matrix rows carry synthetic ids after import; re-key them to corpus ids
  // so candidate supports line up with the reference classes.
  if (matrix) {
    if (matrix->n_samples() != static_cast<int>(corpus.size())) {
      throw gc::ValidationError("matrix row count does not match corpus size");
    }
    std::vector<std::string> ids;
    for (const gc::Sample& sample : corpus) ids.push_back(sample.id);
    gc::AssignmentMatrix rekeyed(ids, matrix->columns());
    for (int x = 0; x < matrix->n_samples(); ++x) {
      for (int j = 0; j < matrix->n_cols(); ++j) rekeyed.set(x, j, matrix->at(x, j) != 0);
    }
    *matrix = std::move(rekeyed);
  }

  nlohmann::json metrics =
      gc::metrics_report(clusters, corpus, refs, matrix.get(), selection.get());
  if (out_path == "-") {
    std::cout << metrics.dump(2) << "\n";
  } else {
    write_json_file(out_path, metrics);
    if (metrics.contains("macro_f1")) {
      std::cout << "macro F1: " << metrics["macro_f1"].get<double>() << "\n";
    }
    std::cout << "metrics: " << out_path << "\n";
  }
  return 0;
}

int run_solve(const std::string& instance_path, const std::string& solver_name,
              std::uint64_t cap) {
  gc::SelectionInstance instance = gc::instance_from_json(load_json_file(instance_path));
  gc::SolveOptions options;
  if (cap > 0) options.exhaustive_cap = cap;
  gc::SelectionSolution solution =
      gc::solve_selection(instance, gc::solver_kind_from_string(solver_name), options);
  std::cout << gc::selection_to_json(solution).dump(2) << "\n";
  return 0;
}

int run_synth(const std::vector<std::string>& dim_specs, int per_combo, std::uint64_t seed,
              const std::string& label_dim, const std::string& out_path, bool imbalance,
              bool noise) {
  std::map<std::string, std::vector<std::string>> dims;
  for (const std::string& spec : dim_specs) {
    std::size_t eq = spec.find('=');
    if (eq == std::string::npos) {
      throw gc::ValidationError("--dim expects name=value1,value2,...: " + spec);
    }
    std::string name = spec.substr(0, eq);
    std::vector<std::string> values;
    std::string rest = spec.substr(eq + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      std::size_t comma = rest.find(',', start);
      if (comma == std::string::npos) comma = rest.size();
      if (comma > start) values.push_back(rest.substr(start, comma - start));
      start = comma + 1;
    }
    dims[name] = std::move(values);
  }
  std::vector<gc::Sample> corpus = gc::generate_synthetic(dims, per_combo, seed, label_dim);
  if (imbalance) {
    corpus = gc::perturb_imbalance(corpus, gc::reference_from_labels(corpus), seed);
  }
  if (noise) {
    gc::NoisyCorpus noisy = gc::perturb_noise(corpus, gc::reference_from_labels(corpus), seed);
    corpus = std::move(noisy.corpus);
    nlohmann::json mask{{"format", 1}, {"eval_ids", noisy.eval_mask}};
    write_json_file(out_path + ".mask.json", mask);
  }
  gc::save_corpus(out_path, corpus);
  std::cout << corpus.size() << " samples -> " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"goal-driven, explainable text clustering"};
  app.require_subcommand(1);
  app.set_config("--config");

  // cluster
  CommonFlags cluster_flags;
  std::string cluster_corpus, cluster_goal, cluster_template = "simple", cluster_template_file;
  std::string cluster_out = "out", cluster_label_attr;
  int cluster_k = 0, cluster_j = 30, cluster_jp = 8, cluster_iters = 5, cluster_budget = 8192;
  double cluster_lambda = 0.5;
  bool cluster_commit = false;
  CLI::App* cluster = app.add_subcommand("cluster", "run the propose/assign/select pipeline");
  cluster->add_option("--corpus", cluster_corpus, "JSONL corpus file")->required();
  cluster->add_option("--goal", cluster_goal, "clustering goal")->required();
  cluster->add_option("--k", cluster_k, "number of clusters")->required();
  cluster->add_option("--lambda", cluster_lambda,
                      "overlap penalty (0.3 works better with many target clusters)")
      ->capture_default_str();
  cluster->add_option("--j", cluster_j, "candidate pool target")->capture_default_str();
  cluster->add_option("--j-per-prompt", cluster_jp, "explanations requested per prompt")
      ->capture_default_str();
  cluster->add_option("--iterations", cluster_iters, "propose/assign/select iterations")
      ->capture_default_str();
  cluster->add_option("--budget", cluster_budget, "prompt context budget in length units")
      ->capture_default_str();
  cluster->add_option("--template", cluster_template, "proposal template: simple or detailed")
      ->check(CLI::IsMember({"simple", "detailed"}))
      ->capture_default_str();
  cluster->add_option("--template-file", cluster_template_file,
                      "custom proposal template with {samples}/{goal}/{j_prime}");
  cluster->add_flag("--commit", cluster_commit, "commit every sample to exactly one cluster");
  cluster->add_option("--out", cluster_out, "artifact directory")->capture_default_str();
  cluster->add_option("--label-attr", cluster_label_attr,
                      "evaluate against this hidden attribute instead of the labels field");
  add_common_flags(cluster, cluster_flags);

  // taxonomy
  CommonFlags tax_flags;
  std::string tax_corpus, tax_goal, tax_template = "detailed", tax_template_file, tax_out = "out";
  int tax_k = 8, tax_j = 30, tax_jp = 8, tax_iters = 5, tax_budget = 8192;
  int tax_max_depth = 2, tax_split = 20;
  double tax_lambda = 0.5;
  CLI::App* taxonomy = app.add_subcommand("taxonomy", "build a recursive cluster taxonomy");
  taxonomy->add_option("--corpus", tax_corpus, "JSONL corpus file")->required();
  taxonomy->add_option("--goal", tax_goal, "clustering goal")->required();
  taxonomy->add_option("--k", tax_k, "clusters per level")->capture_default_str();
  taxonomy->add_option("--lambda", tax_lambda, "overlap penalty")->capture_default_str();
  taxonomy->add_option("--j", tax_j, "candidate pool target")->capture_default_str();
  taxonomy->add_option("--j-per-prompt", tax_jp, "explanations requested per prompt")
      ->capture_default_str();
  taxonomy->add_option("--iterations", tax_iters, "iterations per level")->capture_default_str();
  taxonomy->add_option("--budget", tax_budget, "prompt context budget in length units")
      ->capture_default_str();
  taxonomy->add_option("--template", tax_template, "proposal template: simple or detailed")
      ->check(CLI::IsMember({"simple", "detailed"}))
      ->capture_default_str();
  taxonomy->add_option("--template-file", tax_template_file, "custom proposal template");
  taxonomy->add_option("--max-depth", tax_max_depth, "maximum tree depth")->capture_default_str();
  taxonomy->add_option("--split-threshold", tax_split,
                       "recurse into clusters with more members than this")
      ->capture_default_str();
  taxonomy->add_option("--out", tax_out, "artifact directory")->capture_default_str();
  add_common_flags(taxonomy, tax_flags);

  // eval
  std::string eval_clusters, eval_corpus, eval_label_attr, eval_matrix, eval_selection, eval_mask;
  std::string eval_out = "metrics.json";
  CLI::App* eval = app.add_subcommand("eval", "score a cluster set against reference labels");
  eval->add_option("--clusters", eval_clusters, "clusters.json from a run")->required();
  eval->add_option("--corpus", eval_corpus, "JSONL corpus with labels")->required();
  eval->add_option("--label-attr", eval_label_attr,
                   "use this hidden attribute as the reference instead of the labels field");
  eval->add_option("--matrix", eval_matrix, "matrix.sparse.json for per-stage scores");
  eval->add_option("--selection", eval_selection, "selection.json for the selector score");
  eval->add_option("--mask", eval_mask, "eval mask file from synth --noise");
  eval->add_option("--out", eval_out, "metrics output path (- for stdout)")->capture_default_str();

  // solve
  std::string solve_instance, solve_solver = "exact-ilp";
  std::uint64_t solve_cap = 0;
  CLI::App* solve = app.add_subcommand("solve", "solve a standalone selection instance");
  solve->add_option("--instance", solve_instance, "selection instance JSON")->required();
  solve->add_option("--solver", solve_solver, "exact-ilp, exhaustive, or greedy")
      ->check(CLI::IsMember({"exact-ilp", "exhaustive", "greedy"}))
      ->capture_default_str();
  solve->add_option("--cap", solve_cap, "exhaustive subset cap override");

  // synth
  std::vector<std::string> synth_dims;
  std::string synth_label_dim, synth_out;
  int synth_per_combo = 16;
  std::uint64_t synth_seed = 0;
  bool synth_imbalance = false, synth_noise = false;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");
  synth->add_option("--dim", synth_dims, "dimension spec name=v1,v2,... (repeatable)")
      ->required()
      ->take_all();
  synth->add_option("--per-combo", synth_per_combo, "samples per value combination")
      ->capture_default_str();
  synth->add_option("--seed", synth_seed, "generator seed")->capture_default_str();
  synth->add_option("--label-dim", synth_label_dim, "dimension copied into the labels field");
  synth->add_option("--out", synth_out, "output JSONL path")->required();
  synth->add_flag("--imbalance", synth_imbalance, "apply the class-imbalance perturbation");
  synth->add_flag("--noise", synth_noise, "apply the noise perturbation (writes an eval mask)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cluster->parsed()) {
      return run_cluster(cluster_flags, cluster_corpus, cluster_goal, cluster_k, cluster_lambda,
                         cluster_j, cluster_jp, cluster_iters, cluster_budget, cluster_template,
                         cluster_template_file, cluster_commit, cluster_out, cluster_label_attr);
    }
    if (taxonomy->parsed()) {
      return run_taxonomy(tax_flags, tax_corpus, tax_goal, tax_k, tax_lambda, tax_j, tax_jp,
                          tax_iters, tax_budget, tax_template, tax_template_file, tax_max_depth,
                          tax_split, tax_out);
    }
    if (eval->parsed()) {
      return run_eval(eval_clusters, eval_corpus, eval_label_attr, eval_matrix, eval_selection,
                      eval_mask, eval_out);
    }
    if (solve->parsed()) {
      return run_solve(solve_instance, solve_solver, solve_cap);
    }
    if (synth->parsed()) {
      return run_synth(synth_dims, synth_per_combo, synth_seed, synth_label_dim, synth_out,
                       synth_imbalance, synth_noise);
    }
  } catch (const gc::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const gc::BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return 2;
  } catch (const gc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
