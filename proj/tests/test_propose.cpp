#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "goalclust/oracle.hpp"
#include "goalclust/propose.hpp"
#include "goalclust/synthio.hpp"

using namespace goalclust;

namespace {

std::vector<Sample> short_samples(int n) {
  std::vector<Sample> samples;
  for (int i = 0; i < n; ++i) {
    samples.push_back({"s" + std::to_string(i), "text number " + std::to_string(i), {}, {}});
  }
  return samples;
}

ClusteringTask topic_task(std::vector<Sample> corpus, int j_total, int iterations) {
  ClusteringTask task;
  task.corpus = std::move(corpus);
  task.goal = "cluster by topic";
  task.k = 4;
  task.j_total = j_total;
  task.iterations = iterations;
  task.context_budget = 100000;
  return task;
}

std::map<std::string, std::vector<std::string>> four_topics() {
  return {{"topic", {"sports", "anime", "tech", "productivity"}}};
}

}  // namespace

TEST_CASE("proposal prompt includes every sample under a generous budget") {
  ProposalPrompt prompt = build_proposal_prompt(short_samples(10), "cluster by topic", 8, 100000,
                                                PromptTemplate::builtin(TemplateKind::kSimple));
  CHECK(prompt.sample_ids.size() == 10);
  CHECK(prompt.rendered.find("Sample 1. text number 0") != std::string::npos);
  CHECK(prompt.rendered.find("Sample 10. text number 9") != std::string::npos);
  CHECK(prompt.rendered.find("Goal: cluster by topic") != std::string::npos);
  CHECK(prompt.rendered.find("8 explanations") != std::string::npos);
  CHECK(prompt.requested_count == 8);
}

TEST_CASE("proposal prompt takes the maximal prefix within 75% of the budget") {
  std::vector<Sample> samples = short_samples(1000);
  const int budget = 400;
  ProposalPrompt prompt = build_proposal_prompt(samples, "cluster by topic", 8, budget,
                                                PromptTemplate::builtin(TemplateKind::kSimple));
  CHECK(prompt.sample_ids.size() < 1000);
  CHECK(approx_token_length(prompt.rendered) <= 0.75 * budget);
  // maximality: adding the next sample would overflow
  std::string extended = prompt.rendered;
  REQUIRE(prompt.sample_ids.size() < samples.size());
  extended += "\nSample x. " + samples[prompt.sample_ids.size()].text;
  CHECK(approx_token_length(extended) > 0.75 * budget);
}

TEST_CASE("proposal prompt rejects budgets too small for one sample") {
  CHECK_THROWS_AS(build_proposal_prompt(short_samples(3), "cluster by topic", 8, 40,
                                        PromptTemplate::builtin(TemplateKind::kSimple)),
                  ValidationError);
}

TEST_CASE("prompt templates load from files and validate placeholders") {
  PromptTemplate detailed = PromptTemplate::builtin(TemplateKind::kDetailed);
  CHECK(detailed.text.find("{samples}") != std::string::npos);
  CHECK(detailed.text.find("specifically") != std::string::npos);
  CHECK_THROWS_AS(PromptTemplate::from_file("does-not-exist.txt"), IoError);

  const std::string path = "custom_template.txt";
  {
    std::ofstream out(path);
    out << "{samples}\nThe aim: {goal}\nList {j_prime} groups.\n";
  }
  PromptTemplate custom = PromptTemplate::from_file(path);
  ProposalPrompt prompt = build_proposal_prompt(short_samples(2), "sort by mood", 5, 10000, custom);
  CHECK(prompt.rendered.find("The aim: sort by mood") != std::string::npos);
  CHECK(prompt.rendered.find("List 5 groups.") != std::string::npos);
  std::remove(path.c_str());

  {
    std::ofstream out(path);
    out << "no placeholders at all\n";
  }
  CHECK_THROWS_AS(PromptTemplate::from_file(path), ValidationError);
  std::remove(path.c_str());
}

TEST_CASE("parse_explanations handles the standard numbered format") {
  std::vector<Explanation> parsed =
      parse_explanations("Explanation 1. has a topic of sports\nExplanation 2. has a topic of anime");
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].text == "has a topic of sports");
  CHECK(parsed[1].text == "has a topic of anime");
  CHECK(parsed[0].origin.position == 0);
  CHECK(parsed[1].origin.position == 1);
}

TEST_CASE("parse_explanations tolerates lenient numbering and bullets") {
  std::vector<Explanation> parsed = parse_explanations("1) foo\n2) bar");
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].text == "foo");
  CHECK(parsed[1].text == "bar");

  parsed = parse_explanations("Here are the clusters:\n- 1. alpha\n* Explanation 2: beta\n3: gamma");
  REQUIRE(parsed.size() == 3);
  CHECK(parsed[0].text == "alpha");
  CHECK(parsed[1].text == "beta");
  CHECK(parsed[2].text == "gamma");
}

TEST_CASE("parse_explanations drops empty items and rejects prose") {
  CHECK_THROWS_AS(parse_explanations("no list here"), ParseError);
  std::vector<Explanation> parsed = parse_explanations("Explanation 1.\nExplanation 2. kept");
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].text == "kept");
}

TEST_CASE("propose_candidates gathers every true predicate from the oracle") {
  std::vector<Sample> corpus = generate_synthetic(four_topics(), 8, 11);
  ClusteringTask task = topic_task(corpus, 30, 5);
  OracleProposer proposer(OracleDistractors::kNone);
  ProposeOptions options;
  options.quota = 8;
  ProposeResult result = propose_candidates(task, corpus, proposer, 1, {}, options);
  REQUIRE(result.added.size() == 4);
  std::set<std::string> texts;
  for (const Explanation& e : result.added) texts.insert(e.text);
  for (const char* value : {"sports", "anime", "tech", "productivity"}) {
    CHECK(texts.count(std::string("has a topic of ") + value) == 1);
  }
  CHECK_FALSE(result.quota_reached);  // oracle runs dry before 8
}

TEST_CASE("propose_candidates stalls with a partial pool when the quota is unreachable") {
  std::vector<Sample> corpus = generate_synthetic(four_topics(), 8, 11);
  ClusteringTask task = topic_task(corpus, 30, 1);  // quota 30
  OracleProposer proposer(OracleDistractors::kMergedPartial);
  ProposeResult result = propose_candidates(task, corpus, proposer, 1);
  CHECK(result.added.size() < 30);
  CHECK_FALSE(result.quota_reached);
}

TEST_CASE("propose_candidates deduplicates case-insensitively across calls") {
  std::vector<Sample> corpus = short_samples(4);
  ClusteringTask task = topic_task(corpus, 4, 1);
  FixedScriptBackend proposer({"Explanation 1. Has a topic of sports\nExplanation 2. has a topic of anime",
                               "Explanation 1. has a topic of SPORTS\nExplanation 2. has a topic of anime"});
  ProposeOptions options;
  options.quota = 10;
  options.max_prompts = 2;
  ProposeResult result = propose_candidates(task, corpus, proposer, 1, {}, options);
  CHECK(result.added.size() == 2);

  // existing pool entries also suppress re-proposals
  FixedScriptBackend proposer2({"Explanation 1. has a topic of sports"});
  std::vector<Explanation> existing{Explanation{"HAS A TOPIC OF SPORTS", {}}};
  ProposeResult result2 = propose_candidates(task, corpus, proposer2, 2, existing, options);
  CHECK(result2.added.empty());
}

TEST_CASE("candidate pool is deterministic and independent of parallelism") {
  std::vector<Sample> corpus = generate_synthetic(
      {{"topic", {"sports", "anime", "tech", "productivity"}}, {"style", {"rap", "poem"}}}, 4, 3);
  ClusteringTask task = topic_task(corpus, 6, 1);
  task.context_budget = 2000;  // force several prompts
  OracleProposer proposer(OracleDistractors::kMergedPartial);

  ProposeOptions sequential;
  sequential.parallelism = 1;
  ProposeResult a = propose_candidates(task, corpus, proposer, 1, {}, sequential);
  ProposeOptions wide;
  wide.parallelism = 4;
  ProposeResult b = propose_candidates(task, corpus, proposer, 1, {}, wide);
  ProposeResult c = propose_candidates(task, corpus, proposer, 1, {}, sequential);
  CHECK(a.added == b.added);
  CHECK(a.added == c.added);
  for (const Explanation& e : a.added) CHECK(e.origin.iteration == 1);
}

TEST_CASE("augment_goal embeds the goal and parent verbatim") {
  std::string parent = "advises adding omitted cost figures to the report";
  std::string augmented = augment_goal("cluster feedback for generated summaries", parent);
  CHECK(augmented.find("cluster feedback for generated summaries") != std::string::npos);
  CHECK(augmented.find(parent) != std::string::npos);
  CHECK(augmented.find("finer-grained cluster descriptions") != std::string::npos);

  CHECK_THROWS_AS(augment_goal("goal", ""), ValidationError);

  std::string twice = augment_goal(augment_goal("g", "parent one"), "parent two");
  CHECK(twice.find("parent one") != std::string::npos);
  CHECK(twice.find("parent two") != std::string::npos);
}
