#include <doctest.h>

#include <random>

#include "goalclust/eval.hpp"
#include "support.hpp"

using namespace goalclust;

namespace {

ReferenceLabels refs_from(const std::map<std::string, std::set<std::string>>& classes) {
  ReferenceLabels refs;
  refs.classes = classes;
  return refs;
}

std::vector<Sample> id_corpus(const std::vector<std::string>& ids) {
  std::vector<Sample> corpus;
  for (const std::string& id : ids) corpus.push_back({id, "text " + id, {}, {}});
  return corpus;
}

// builds outputs/refs realizing a given overlap matrix on disjoint samples
std::pair<std::vector<std::set<std::string>>, ReferenceLabels> from_overlap(
    const std::vector<std::vector<long long>>& overlap) {
  std::vector<std::set<std::string>> outputs(overlap.size());
  ReferenceLabels refs;
  int counter = 0;
  for (std::size_t i = 0; i < overlap.size(); ++i) {
    for (std::size_t r = 0; r < overlap[i].size(); ++r) {
      std::string class_id = "c" + std::to_string(r);
      refs.classes[class_id];  // ensure class exists even if empty overlap
      for (long long t = 0; t < overlap[i][r]; ++t) {
        std::string id = "s" + std::to_string(counter++);
        outputs[i].insert(id);
        refs.classes[class_id].insert(id);
      }
    }
  }
  return {outputs, refs};
}

}  // namespace

TEST_CASE("hungarian matching on diagonal dominance") {
  auto [outputs, refs] = from_overlap({{5, 0}, {0, 5}});
  Matching m = hungarian_match(outputs, refs);
  CHECK(m.total_overlap == 10);
  CHECK(m.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
}

TEST_CASE("hungarian matching prefers the cross pairing when it wins") {
  auto [outputs, refs] = from_overlap({{2, 3}, {4, 1}});
  Matching m = hungarian_match(outputs, refs);
  CHECK(m.total_overlap == 7);
  CHECK(m.pairs == std::vector<std::pair<int, int>>{{0, 1}, {1, 0}});
}

TEST_CASE("rectangular matching pads with zero-weight dummies") {
  auto [outputs, refs] = from_overlap({{3, 0, 0, 0, 0}, {0, 3, 0, 0, 0}, {0, 0, 3, 0, 0}});
  Matching m = hungarian_match(outputs, refs);
  CHECK(m.pairs.size() == 3);  // every output matched; two references unmatched
  CHECK(m.total_overlap == 9);

  // more outputs than references: extra outputs absorb the dummies
  auto [outputs2, refs2] = from_overlap({{4}, {2}, {1}});
  Matching m2 = hungarian_match(outputs2, refs2);
  CHECK(m2.pairs.size() == 1);
  CHECK(m2.total_overlap == 4);
}

TEST_CASE("hungarian matching equals permutation brute force on random matrices") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    int n_out = 1 + static_cast<int>(rng() % 6);
    int n_ref = 1 + static_cast<int>(rng() % 6);
    std::vector<std::vector<long long>> overlap(static_cast<std::size_t>(n_out),
                                                std::vector<long long>(static_cast<std::size_t>(n_ref)));
    for (auto& row : overlap) {
      for (auto& cell : row) cell = static_cast<long long>(rng() % 9);
    }
    auto [outputs, refs] = from_overlap(overlap);
    Matching m = hungarian_match(outputs, refs);
    CHECK(m.total_overlap == testsupport::brute_force_matching(overlap));
  }
}

TEST_CASE("macro F1 is 100 exactly when outputs equal references") {
  auto [outputs, refs] = from_overlap({{6, 0}, {0, 4}});
  Matching m = hungarian_match(outputs, refs);
  CHECK(macro_f1(outputs, refs, m) == 100.0);
}

TEST_CASE("macro F1 on the worked partial-overlap example") {
  ReferenceLabels refs = refs_from({{"r1", {"x1", "x2"}}, {"r2", {"x3", "x4"}}});
  std::vector<std::set<std::string>> outputs{{"x1", "x2", "x3"}, {"x4"}};
  Matching m = hungarian_match(outputs, refs);
  F1Report report = macro_f1_report(outputs, refs, m);
  CHECK(report.macro == doctest::Approx(73.33).epsilon(0.001));
  REQUIRE(report.per_class.size() == 2);
  CHECK(report.per_class[0].f1 == doctest::Approx(80.0));
  CHECK(report.per_class[1].f1 == doctest::Approx(66.6667));
}

TEST_CASE("macro F1 is zero for disjoint outputs and penalizes unmatched classes") {
  ReferenceLabels refs = refs_from({{"r1", {"x1"}}, {"r2", {"x2"}}});
  std::vector<std::set<std::string>> outputs{{"y1"}, {"y2"}};
  Matching m = hungarian_match(outputs, refs);
  CHECK(macro_f1(outputs, refs, m) == 0.0);

  // three classes, one output: the two unmatched classes contribute zero
  ReferenceLabels refs3 = refs_from({{"a", {"x1", "x2"}}, {"b", {"x3"}}, {"c", {"x4"}}});
  std::vector<std::set<std::string>> one{{"x1", "x2"}};
  Matching m3 = hungarian_match(one, refs3);
  CHECK(macro_f1(one, refs3, m3) == doctest::Approx(100.0 / 3.0));
}

TEST_CASE("macro F1 is invariant under output relabeling") {
  ReferenceLabels refs = refs_from({{"r1", {"x1", "x2"}}, {"r2", {"x3", "x4"}}});
  std::vector<std::set<std::string>> outputs{{"x1", "x2", "x3"}, {"x4"}};
  std::vector<std::set<std::string>> flipped{{"x4"}, {"x1", "x2", "x3"}};
  double a = macro_f1(outputs, refs, hungarian_match(outputs, refs));
  double b = macro_f1(flipped, refs, hungarian_match(flipped, refs));
  CHECK(a == b);
}

TEST_CASE("coverage and overlap percentages") {
  ClusterSet clusters;
  clusters.clusters.push_back(Cluster{Explanation{"e1", {}}, {"x1", "x2"}});
  clusters.clusters.push_back(Cluster{Explanation{"e2", {}}, {"x2", "x3"}});
  std::vector<Sample> corpus = id_corpus({"x1", "x2", "x3", "x4"});
  CoverageReport report = coverage_overlap(clusters, corpus);
  CHECK(report.covered_pct == 75.0);
  CHECK(report.exactly_once_pct == 50.0);
  CHECK(report.multi_pct == 25.0);
  CHECK(report.covered_pct == report.exactly_once_pct + report.multi_pct);

  ClusterSet partition;
  partition.clusters.push_back(Cluster{Explanation{"e1", {}}, {"x1", "x2"}});
  partition.clusters.push_back(Cluster{Explanation{"e2", {}}, {"x3", "x4"}});
  CoverageReport perfect = coverage_overlap(partition, corpus);
  CHECK(perfect.covered_pct == 100.0);
  CHECK(perfect.exactly_once_pct == 100.0);
  CHECK(perfect.multi_pct == 0.0);

  CoverageReport empty = coverage_overlap(ClusterSet{}, corpus);
  CHECK(empty.covered_pct == 0.0);
  CHECK(empty.exactly_once_pct == 0.0);
  CHECK(empty.multi_pct == 0.0);
}

TEST_CASE("stage scores on the worked recall/specificity example") {
  // |X| = 10, class of 4; support hits 3 in-class plus 1 outsider
  std::vector<Sample> corpus =
      id_corpus({"a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4", "b5", "b6"});
  ReferenceLabels refs = refs_from({{"A", {"a1", "a2", "a3", "a4"}}});
  std::map<std::string, std::set<std::string>> supported{{"A", {"a1", "a2", "a3", "b1"}}};
  StageScores scores = stage_scores(refs, supported, corpus);
  REQUIRE(scores.per_class.size() == 1);
  CHECK(scores.per_class[0].recall == doctest::Approx(75.0));
  CHECK(scores.per_class[0].specificity == doctest::Approx(83.33).epsilon(0.001));

  // exact support
  supported["A"] = {"a1", "a2", "a3", "a4"};
  scores = stage_scores(refs, supported, corpus);
  CHECK(scores.per_class[0].recall == 100.0);
  CHECK(scores.per_class[0].specificity == 100.0);
  CHECK(scores.aggregate == 100.0);

  // empty support
  supported["A"] = {};
  scores = stage_scores(refs, supported, corpus);
  CHECK(scores.per_class[0].recall == 0.0);
  CHECK(scores.per_class[0].specificity == 100.0);
}

TEST_CASE("stage score invariances") {
  std::vector<Sample> corpus = id_corpus({"a1", "a2", "b1", "b2", "b3", "b4"});
  ReferenceLabels refs = refs_from({{"A", {"a1", "a2"}}});
  std::map<std::string, std::set<std::string>> supported{{"A", {"a1"}}};
  double recall_before = stage_scores(refs, supported, corpus).per_class[0].recall;
  supported["A"].insert("b1");  // out-of-class addition: recall unchanged
  CHECK(stage_scores(refs, supported, corpus).per_class[0].recall == recall_before);

  double specificity_before = stage_scores(refs, supported, corpus).per_class[0].specificity;
  supported["A"].insert("a2");  // in-class addition: specificity unchanged
  CHECK(stage_scores(refs, supported, corpus).per_class[0].specificity == specificity_before);
}

TEST_CASE("stage scores reject degenerate classes") {
  std::vector<Sample> corpus = id_corpus({"a1", "a2"});
  ReferenceLabels refs = refs_from({{"A", {"a1", "a2"}}});
  std::map<std::string, std::set<std::string>> supported{{"A", {"a1"}}};
  CHECK_THROWS_AS(stage_scores(refs, supported, corpus), ValidationError);
}

TEST_CASE("candidate pool scores track each class's best recall") {
  std::vector<Sample> corpus = id_corpus({"a1", "a2", "b1", "b2"});
  ReferenceLabels refs = refs_from({{"A", {"a1", "a2"}}, {"B", {"b1", "b2"}}});

  // candidates include each class exactly
  std::vector<std::set<std::string>> exact{{"a1", "a2"}, {"b1", "b2"}};
  CandidatePoolScore score = candidate_pool_score(refs, exact, corpus);
  CHECK(score.score == 100.0);
  CHECK(score.matched_count == 2);

  // one union candidate takes recall 1 for both classes but counts once
  std::vector<std::set<std::string>> united{{"a1", "a2", "b1", "b2"}};
  score = candidate_pool_score(refs, united, corpus);
  CHECK(score.score == 100.0);
  CHECK(score.matched_count == 1);

  // half coverage of one class contributes 50
  std::vector<std::set<std::string>> half{{"a1"}, {"b1", "b2"}};
  score = candidate_pool_score(refs, half, corpus);
  CHECK(score.score == doctest::Approx(75.0));
  CHECK(score.matched_count == 2);
}

TEST_CASE("random baseline is seeded and degenerate at K = 1") {
  std::vector<Sample> corpus = id_corpus({"x1", "x2", "x3", "x4"});
  ClusterSet a = random_baseline(corpus, 4, 7);
  ClusterSet b = random_baseline(corpus, 4, 7);
  CHECK(a == b);
  ClusterSet c = random_baseline(corpus, 4, 8);
  CHECK(a.committed != c.committed);

  // K = 1 against a single-class reference scores perfect F1
  ReferenceLabels refs = refs_from({{"all", {"x1", "x2", "x3", "x4"}}});
  ClusterSet single = random_baseline(corpus, 1, 3);
  double f1 = macro_f1(output_sets(single), refs, hungarian_match(output_sets(single), refs));
  CHECK(f1 == 100.0);
}

TEST_CASE("reference builders read labels and hidden attributes") {
  std::vector<Sample> corpus{{"x1", "t", {{"topic", "sports"}}, "A"},
                             {"x2", "t", {{"topic", "anime"}}, "A"},
                             {"x3", "t", {{"topic", "sports"}}, "B"},
                             {"x4", "t", {}, {}}};
  ReferenceLabels by_label = reference_from_labels(corpus);
  CHECK(by_label.classes.size() == 2);
  CHECK(by_label.classes.at("A") == std::set<std::string>{"x1", "x2"});

  ReferenceLabels by_attr = reference_from_attr(corpus, "topic");
  CHECK(by_attr.classes.at("sports") == std::set<std::string>{"x1", "x3"});
  CHECK(by_attr.explanations.at("sports") == "has a topic of sports");
}

TEST_CASE("committed sets form a partition view") {
  ClusterSet clusters;
  clusters.clusters.push_back(Cluster{Explanation{"e1", {}}, {"x1", "x2"}});
  clusters.clusters.push_back(Cluster{Explanation{"e2", {}}, {"x2"}});
  CHECK_THROWS_AS(committed_sets(clusters), ValidationError);
  clusters.committed = std::map<std::string, int>{{"x1", 0}, {"x2", 1}};
  std::vector<std::set<std::string>> sets = committed_sets(clusters);
  CHECK(sets[0] == std::set<std::string>{"x1"});
  CHECK(sets[1] == std::set<std::string>{"x2"});
}
