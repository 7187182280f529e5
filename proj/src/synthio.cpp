#include "goalclust/synthio.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "goalclust/eval.hpp"
#include "goalclust/oracle.hpp"
#include "goalclust/rng.hpp"

namespace goalclust {
namespace {

// Filler vocabulary for synthetic sample text. Neutral nouns only, so no
// filler word collides with a dimension name.
constexpr const char* kWordBank[] = {
    "anchor", "basket", "candle",  "drawer",  "engine",  "fabric", "garden", "hammer",
    "island", "jacket", "kettle",  "ladder",  "marble",  "needle", "orchard", "pencil",
    "quarry", "ribbon", "saddle",  "timber",  "valley",  "wagon",  "yarn",   "zipper",
    "bridge", "canyon", "domino",  "ember",   "falcon",  "glacier", "harbor", "ivory",
    "jungle", "kernel", "lantern", "meadow",  "nickel",  "oyster",  "pepper", "quiver",
    "rocket", "shadow", "tunnel",  "umbrella", "velvet",  "willow",  "yonder", "zephyr",
    "attic",  "barrel", "cobble",  "dagger",  "easel",   "fiddle",  "goblet", "hollow",
    "ingot",  "jigsaw", "knoll",   "lagoon",  "mosaic",  "nugget",  "opal",   "parcel",
};
constexpr std::size_t kWordBankSize = sizeof(kWordBank) / sizeof(kWordBank[0]);
constexpr int kFillerWords = 6;

std::string zero_padded(std::size_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*zu", width, value);
  return std::string(buf);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

std::string dump_pretty(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json explanation_to_json(const Explanation& e) {
  return nlohmann::json{{"text", e.text},
                        {"iteration", e.origin.iteration},
                        {"prompt_index", e.origin.prompt_index},
                        {"position", e.origin.position}};
}

Explanation explanation_from_json(const nlohmann::json& j) {
  Explanation e;
  e.text = j.at("text").get<std::string>();
  e.origin.iteration = j.value("iteration", 0);
  e.origin.prompt_index = j.value("prompt_index", 0);
  e.origin.position = j.value("position", 0);
  return e;
}

void require_format(const nlohmann::json& j, const char* what) {
  if (!j.is_object() || j.value("format", 0) != 1) {
    throw ParseError(std::string(what) + ": missing or unsupported \"format\" field");
  }
}

// Removes floor(n/2) seeded-random members of one class from `removed`'s
// complement, operating on whatever the class still has left.
void halve_class(const std::set<std::string>& class_members, std::set<std::string>& removed,
                 std::mt19937_64& rng) {
  std::vector<std::string> remaining;
  for (const std::string& id : class_members) {
    if (!removed.count(id)) remaining.push_back(id);
  }
  shuffle_in_place(remaining, rng);
  const std::size_t drop = remaining.size() / 2;
  for (std::size_t i = 0; i < drop; ++i) removed.insert(remaining[i]);
}

}  // namespace

std::vector<Sample> generate_synthetic(const std::map<std::string, std::vector<std::string>>& dims,
                                       int per_combo, std::uint64_t seed,
                                       const std::string& label_dim) {
  if (dims.empty()) throw ValidationError("generate_synthetic: at least one dimension required");
  if (per_combo < 1) throw ValidationError("generate_synthetic: per_combo must be >= 1");
  std::vector<std::string> dim_names;
  for (const auto& [name, values] : dims) {
    if (values.size() < 2) {
      throw ValidationError("generate_synthetic: dimension \"" + name + "\" needs >= 2 values");
    }
    dim_names.push_back(name);
  }
  std::string label = label_dim.empty() ? dim_names.front() : label_dim;
  if (!dims.count(label)) {
    throw ValidationError("generate_synthetic: unknown label dimension \"" + label + "\"");
  }

  std::mt19937_64 rng = seeded_rng(seed);
  std::vector<Sample> corpus;
  std::vector<std::size_t> odometer(dim_names.size(), 0);
  bool done = false;
  while (!done) {
    for (int rep = 0; rep < per_combo; ++rep) {
      Sample sample;
      sample.id = "syn-" + zero_padded(corpus.size(), 5);
      std::string text;
      for (std::size_t d = 0; d < dim_names.size(); ++d) {
        const std::string& value = dims.at(dim_names[d])[odometer[d]];
        if (!text.empty()) text += " ";
        text += marker_token(dim_names[d], value);
        sample.hidden_attrs[dim_names[d]] = value;
      }
      for (int w = 0; w < kFillerWords; ++w) {
        text += " ";
        text += kWordBank[bounded_draw(rng, kWordBankSize)];
      }
      sample.text = std::move(text);
      sample.ref_label = sample.hidden_attrs.at(label);
      corpus.push_back(std::move(sample));
    }
    // Advance the value odometer, last dimension fastest.
    done = true;
    for (std::size_t d = dim_names.size(); d-- > 0;) {
      if (++odometer[d] < dims.at(dim_names[d]).size()) {
        done = false;
        break;
      }
      odometer[d] = 0;
    }
  }
  return corpus;
}

std::vector<Sample> perturb_imbalance(const std::vector<Sample>& corpus,
                                      const ReferenceLabels& refs, std::uint64_t seed) {
  if (refs.classes.size() < 7) {
    throw ValidationError("perturb_imbalance: needs >= 7 reference classes, got " +
                          std::to_string(refs.classes.size()));
  }
  std::vector<std::string> class_ids;
  for (const auto& [id, members] : refs.classes) class_ids.push_back(id);

  std::mt19937_64 rng = seeded_rng(seed);
  std::vector<std::string> halved = sample_without_replacement(class_ids, 7, rng);
  std::set<std::string> removed;
  for (const std::string& id : halved) halve_class(refs.classes.at(id), removed, rng);
  std::vector<std::string> quartered = sample_without_replacement(halved, 3, rng);
  for (const std::string& id : quartered) halve_class(refs.classes.at(id), removed, rng);

  std::vector<Sample> result;
  result.reserve(corpus.size() - removed.size());
  for (const Sample& sample : corpus) {
    if (!removed.count(sample.id)) result.push_back(sample);
  }
  return result;
}

NoisyCorpus perturb_noise(const std::vector<Sample>& corpus, const ReferenceLabels& refs,
                          std::uint64_t seed) {
  if (refs.classes.size() < 5) {
    throw ValidationError("perturb_noise: needs >= 5 reference classes, got " +
                          std::to_string(refs.classes.size()));
  }
  std::vector<std::string> class_ids;
  for (const auto& [id, members] : refs.classes) class_ids.push_back(id);

  std::mt19937_64 rng = seeded_rng(seed);
  std::vector<std::string> noise_classes = sample_without_replacement(class_ids, 4, rng);
  std::set<std::string> removed;
  for (const std::string& id : noise_classes) {
    std::vector<std::string> members(refs.classes.at(id).begin(), refs.classes.at(id).end());
    shuffle_in_place(members, rng);
    const std::size_t keep = members.size() / 8;
    for (std::size_t i = keep; i < members.size(); ++i) removed.insert(members[i]);
  }

  std::map<std::string, std::string> class_of;
  for (const auto& [id, members] : refs.classes) {
    for (const std::string& sid : members) class_of[sid] = id;
  }
  const std::set<std::string> noise_set(noise_classes.begin(), noise_classes.end());

  NoisyCorpus result;
  for (const Sample& sample : corpus) {
    if (removed.count(sample.id)) continue;
    result.corpus.push_back(sample);
    auto it = class_of.find(sample.id);
    if (it != class_of.end() && !noise_set.count(it->second)) {
      result.eval_mask.insert(sample.id);
    }
  }
  return result;
}

std::vector<Sample> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read corpus: " + path);
  std::vector<Sample> corpus;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json record = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded() || !record.is_object()) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": malformed JSONL record");
    }
    if (!record.contains("id") || !record["id"].is_string()) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": missing id field");
    }
    if (!record.contains("text") || !record["text"].is_string()) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": missing text field");
    }
    Sample sample;
    sample.id = record["id"].get<std::string>();
    sample.text = record["text"].get<std::string>();
    if (record.contains("labels")) {
      if (!record["labels"].is_string()) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": labels must be a string");
      }
      sample.ref_label = record["labels"].get<std::string>();
    }
    if (record.contains("attrs")) {
      if (!record["attrs"].is_object()) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": attrs must be an object");
      }
      for (const auto& [key, value] : record["attrs"].items()) {
        if (!value.is_string()) {
          throw ParseError(path + ":" + std::to_string(line_no) + ": attrs values must be strings");
        }
        sample.hidden_attrs[key] = value.get<std::string>();
      }
    }
    if (!seen.insert(sample.id).second) {
      throw ValidationError(path + ": duplicate sample id \"" + sample.id + "\"");
    }
    corpus.push_back(std::move(sample));
  }
  return corpus;
}

void save_corpus(const std::string& path, const std::vector<Sample>& corpus) {
  std::ostringstream out;
  for (const Sample& sample : corpus) {
    nlohmann::json record{{"id", sample.id}, {"text", sample.text}};
    if (sample.ref_label) record["labels"] = *sample.ref_label;
    if (!sample.hidden_attrs.empty()) record["attrs"] = sample.hidden_attrs;
    out << record.dump() << '\n';
  }
  write_text_file(path, out.str());
}

nlohmann::json task_to_json(const ClusteringTask& task) {
  return nlohmann::json{{"format", 1},
                        {"goal", task.goal},
                        {"k", task.k},
                        {"lambda", task.lambda},
                        {"j_total", task.j_total},
                        {"j_per_prompt", task.j_per_prompt},
                        {"iterations", task.iterations},
                        {"context_budget", task.context_budget},
                        {"seed", task.seed},
                        {"corpus_size", task.corpus.size()}};
}

nlohmann::json matrix_to_json(const AssignmentMatrix& matrix) {
  nlohmann::json ones = nlohmann::json::array();
  for (int x = 0; x < matrix.n_samples(); ++x) {
    for (int j = 0; j < matrix.n_cols(); ++j) {
      if (matrix.at(x, j)) ones.push_back(nlohmann::json::array({x, j}));
    }
  }
  nlohmann::json columns = nlohmann::json::array();
  for (const Explanation& e : matrix.columns()) columns.push_back(e.text);
  return nlohmann::json{{"format", 1},
                        {"n", matrix.n_samples()},
                        {"m", matrix.n_cols()},
                        {"ones", std::move(ones)},
                        {"columns", std::move(columns)}};
}

AssignmentMatrix matrix_from_json(const nlohmann::json& j) {
  require_format(j, "assignment matrix");
  const int n = j.at("n").get<int>();
  const int m = j.at("m").get<int>();
  if (n < 0 || m < 0) throw ParseError("assignment matrix: negative dimensions");
  std::vector<std::string> row_ids;
  row_ids.reserve(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) row_ids.push_back("row-" + zero_padded(static_cast<std::size_t>(x), 5));
  std::vector<Explanation> columns;
  for (const auto& text : j.at("columns")) {
    columns.push_back(Explanation{text.get<std::string>(), {}});
  }
  if (static_cast<int>(columns.size()) != m) {
    throw ParseError("assignment matrix: column list does not match m");
  }
  AssignmentMatrix matrix(std::move(row_ids), std::move(columns));
  for (const auto& pair : j.at("ones")) {
    matrix.set(pair.at(0).get<int>(), pair.at(1).get<int>(), true);
  }
  return matrix;
}

nlohmann::json instance_to_json(const SelectionInstance& instance) {
  nlohmann::json j = matrix_to_json(instance.matrix);
  j["mode"] = to_string(instance.mode);
  j["lambda"] = instance.lambda;
  if (instance.mode == SelectionMode::kConstrainedK) {
    j["k"] = instance.k;
  } else {
    j["cost"] = instance.cost;
  }
  return j;
}

SelectionInstance instance_from_json(const nlohmann::json& j) {
  SelectionInstance instance;
  instance.matrix = matrix_from_json(j);
  instance.mode = selection_mode_from_string(j.value("mode", "constrained-k"));
  instance.lambda = j.value("lambda", 0.5);
  if (instance.mode == SelectionMode::kConstrainedK) {
    if (!j.contains("k")) throw ParseError("selection instance: constrained-k requires \"k\"");
    instance.k = j.at("k").get<int>();
  } else {
    if (!j.contains("cost")) throw ParseError("selection instance: penalized mode requires \"cost\"");
    instance.cost = j.at("cost").get<double>();
  }
  return instance;
}

nlohmann::json selection_to_json(const SelectionSolution& solution) {
  return nlohmann::json{{"format", 1},
                        {"mode", to_string(solution.mode)},
                        {"solver", to_string(solution.solver)},
                        {"lambda", solution.lambda},
                        {"selected", solution.selected},
                        {"selected_indices", solution.selected_indices()},
                        {"inclusion_counts", solution.inclusion_counts},
                        {"objective", solution.objective}};
}

nlohmann::json clusters_to_json(const ClusterSet& clusters) {
  nlohmann::json cluster_list = nlohmann::json::array();
  for (const Cluster& cluster : clusters.clusters) {
    cluster_list.push_back(nlohmann::json{{"explanation", explanation_to_json(cluster.explanation)},
                                          {"members", cluster.members}});
  }
  nlohmann::json j{{"format", 1},
                   {"clusters", std::move(cluster_list)},
                   {"uncovered", clusters.uncovered}};
  if (clusters.committed) j["committed"] = *clusters.committed;
  return j;
}

ClusterSet clusters_from_json(const nlohmann::json& j) {
  require_format(j, "cluster set");
  ClusterSet clusters;
  for (const auto& entry : j.at("clusters")) {
    Cluster cluster;
    cluster.explanation = explanation_from_json(entry.at("explanation"));
    for (const auto& id : entry.at("members")) cluster.members.insert(id.get<std::string>());
    clusters.clusters.push_back(std::move(cluster));
  }
  for (const auto& id : j.at("uncovered")) clusters.uncovered.insert(id.get<std::string>());
  if (j.contains("committed")) {
    std::map<std::string, int> committed;
    for (const auto& [id, index] : j.at("committed").items()) {
      committed[id] = index.get<int>();
    }
    clusters.committed = std::move(committed);
  }
  return clusters;
}

namespace {

nlohmann::json taxonomy_node_to_json(const TaxonomyNode& node) {
  nlohmann::json children = nlohmann::json::array();
  for (const TaxonomyNode& child : node.children) children.push_back(taxonomy_node_to_json(child));
  return nlohmann::json{{"explanation", explanation_to_json(node.explanation)},
                        {"depth", node.depth},
                        {"members", node.members},
                        {"children", std::move(children)}};
}

TaxonomyNode taxonomy_node_from_json(const nlohmann::json& j) {
  TaxonomyNode node;
  node.explanation = explanation_from_json(j.at("explanation"));
  node.depth = j.at("depth").get<int>();
  for (const auto& id : j.at("members")) node.members.insert(id.get<std::string>());
  for (const auto& child : j.at("children")) node.children.push_back(taxonomy_node_from_json(child));
  return node;
}

void render_node(const TaxonomyNode& node, std::ostringstream& out) {
  for (int i = 0; i < node.depth; ++i) out << "  ";
  out << node.explanation.text << " (" << node.members.size() << " samples)\n";
  for (const TaxonomyNode& child : node.children) render_node(child, out);
}

}  // namespace

nlohmann::json taxonomy_to_json(const TaxonomyNode& root) {
  return nlohmann::json{{"format", 1}, {"root", taxonomy_node_to_json(root)}};
}

TaxonomyNode taxonomy_from_json(const nlohmann::json& j) {
  require_format(j, "taxonomy");
  return taxonomy_node_from_json(j.at("root"));
}

std::string render_taxonomy_text(const TaxonomyNode& root) {
  std::ostringstream out;
  render_node(root, out);
  return out.str();
}

nlohmann::json metrics_report(const ClusterSet& clusters, const std::vector<Sample>& corpus,
                              const ReferenceLabels& refs, const AssignmentMatrix* matrix,
                              const SelectionSolution* selection) {
  nlohmann::json metrics{{"format", 1}};

  CoverageReport coverage = coverage_overlap(clusters, corpus);
  metrics["coverage"] = {{"covered_pct", coverage.covered_pct},
                         {"exactly_once_pct", coverage.exactly_once_pct},
                         {"multi_pct", coverage.multi_pct}};

  if (refs.classes.empty()) return metrics;

  std::vector<std::set<std::string>> outputs = output_sets(clusters);
  Matching matching = hungarian_match(outputs, refs);
  F1Report report = macro_f1_report(outputs, refs, matching);
  metrics["macro_f1"] = report.macro;
  nlohmann::json per_class = nlohmann::json::array();
  std::map<std::string, std::set<std::string>> supported;
  for (const PerClassF1& entry : report.per_class) {
    nlohmann::json row{{"class", entry.class_id},
                       {"matched_output", entry.matched_output},
                       {"f1", entry.f1}};
    if (auto it = refs.explanations.find(entry.class_id); it != refs.explanations.end()) {
      row["reference_explanation"] = it->second;
    }
    if (entry.matched_output >= 0) {
      row["matched_explanation"] =
          clusters.clusters[static_cast<std::size_t>(entry.matched_output)].explanation.text;
      supported[entry.class_id] = outputs[static_cast<std::size_t>(entry.matched_output)];
    }
    per_class.push_back(std::move(row));
  }
  metrics["per_class"] = std::move(per_class);
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [out, ref] : matching.pairs) pairs.push_back(nlohmann::json::array({out, ref}));
  metrics["matching"] = {{"pairs", std::move(pairs)}, {"total_overlap", matching.total_overlap}};

  StageScores stage = stage_scores(refs, supported, corpus);
  nlohmann::json stage_rows = nlohmann::json::array();
  for (const ClassScore& row : stage.per_class) {
    stage_rows.push_back(nlohmann::json{{"class", row.class_id},
                                        {"recall", row.recall},
                                        {"specificity", row.specificity},
                                        {"score", row.score}});
  }
  metrics["stage"] = {{"aggregate", stage.aggregate}, {"per_class", std::move(stage_rows)}};

  if (clusters.committed) {
    std::vector<std::set<std::string>> committed = committed_sets(clusters);
    metrics["macro_f1_committed"] = macro_f1(committed, refs, hungarian_match(committed, refs));
  }

  if (matrix) {
    std::vector<std::set<std::string>> candidates;
    for (int j = 0; j < matrix->n_cols(); ++j) candidates.push_back(cluster_of(*matrix, j));
    CandidatePoolScore propose_score = candidate_pool_score(refs, candidates, corpus);
    metrics["proposer"] = {{"score", propose_score.score},
                           {"matched_count", propose_score.matched_count}};
    if (selection) {
      std::vector<std::set<std::string>> picked;
      for (int j : selection->selected_indices()) picked.push_back(cluster_of(*matrix, j));
      CandidatePoolScore select_score = candidate_pool_score(refs, picked, corpus);
      metrics["selector"] = {{"score", select_score.score},
                             {"matched_count", select_score.matched_count}};
    }
  }
  return metrics;
}

nlohmann::json save_artifacts(const std::string& dir, const ClusteringTask& task,
                              const RunResult& result,
                              const std::map<std::string, std::string>& backend_ids,
                              const TaxonomyNode* taxonomy, const nlohmann::json* metrics) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  std::vector<std::string> artifacts;

  nlohmann::json task_json = task_to_json(task);
  write_text_file((base / "task.json").string(), dump_pretty(task_json));
  artifacts.push_back("task.json");

  std::ostringstream pool;
  for (const Explanation& e : result.pool) pool << explanation_to_json(e).dump() << '\n';
  write_text_file((base / "pool.jsonl").string(), pool.str());
  artifacts.push_back("pool.jsonl");

  write_text_file((base / "matrix.sparse.json").string(), dump_pretty(matrix_to_json(result.matrix)));
  artifacts.push_back("matrix.sparse.json");

  write_text_file((base / "selection.json").string(),
                  dump_pretty(selection_to_json(result.selection)));
  artifacts.push_back("selection.json");

  write_text_file((base / "clusters.json").string(), dump_pretty(clusters_to_json(result.clusters)));
  artifacts.push_back("clusters.json");

  if (taxonomy) {
    write_text_file((base / "taxonomy.json").string(), dump_pretty(taxonomy_to_json(*taxonomy)));
    write_text_file((base / "taxonomy.txt").string(), render_taxonomy_text(*taxonomy));
    artifacts.push_back("taxonomy.json");
    artifacts.push_back("taxonomy.txt");
  }
  if (metrics) {
    write_text_file((base / "metrics.json").string(), dump_pretty(*metrics));
    artifacts.push_back("metrics.json");
  }

  nlohmann::json manifest{{"format", 1},
                          {"config_hash", fnv1a64_hex(task_json.dump())},
                          {"seed", task.seed},
                          {"backends", backend_ids},
                          {"artifacts", artifacts},
                          {"created_unix", static_cast<std::int64_t>(std::time(nullptr))}};
  write_text_file((base / "manifest.json").string(), dump_pretty(manifest));
  return manifest;
}

}  // namespace goalclust
