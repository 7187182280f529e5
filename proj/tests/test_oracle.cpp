#include <doctest.h>

#include "goalclust/oracle.hpp"

using namespace goalclust;

namespace {

std::string proposal_prompt(const std::vector<std::string>& texts, const std::string& goal) {
  std::string prompt;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    prompt += "Sample " + std::to_string(i + 1) + ". " + texts[i] + "\n";
  }
  prompt += "\nGoal: " + goal + "\n\nGenerate a list of 8 explanations for candidate clusters.";
  return prompt;
}

std::string assign_prompt(const std::string& predicate, const std::string& text) {
  return "Predicate: " + predicate + "\nText: " + text +
         "\nIs the Predicate true on the Text? Yes or No. When uncertain, output No.";
}

}  // namespace

TEST_CASE("marker tokens extract in order of appearance") {
  std::string text = marker_token("topic", "sports") + " filler " + marker_token("style", "rap");
  auto markers = extract_markers(text);
  REQUIRE(markers.size() == 2);
  CHECK(markers[0] == std::pair<std::string, std::string>{"topic", "sports"});
  CHECK(markers[1] == std::pair<std::string, std::string>{"style", "rap"});
}

TEST_CASE("oracle predicate evaluation") {
  std::string text = marker_token("topic", "sports") + " kettle harbor";
  CHECK(oracle_predicate_true("has a topic of sports", text));
  CHECK_FALSE(oracle_predicate_true("has a topic of anime", text));
  CHECK(oracle_predicate_true("has a topic of sports or anime", text));
  CHECK(oracle_predicate_true("has a topic of anime or sports", text));
  CHECK(oracle_predicate_true("has a topic of sports and mentions 'kettle'", text));
  CHECK_FALSE(oracle_predicate_true("has a topic of sports and mentions 'velvet'", text));
  CHECK_FALSE(oracle_predicate_true("not a predicate at all", text));
  CHECK(oracle_predicate_true("has a topic of sports.", text));  // trailing period tolerated
}

TEST_CASE("oracle proposer emits one predicate per observed goal-dimension value") {
  std::string prompt = proposal_prompt({marker_token("topic", "sports") + " anchor basket",
                                        marker_token("topic", "anime") + " candle drawer"},
                                       "cluster by topic");
  std::string response = oracle_propose(prompt, OracleDistractors::kNone);
  CHECK(response == "Explanation 1. has a topic of sports\nExplanation 2. has a topic of anime\n");
}

TEST_CASE("oracle proposer distractors add a merged predicate") {
  std::string prompt = proposal_prompt({marker_token("topic", "sports") + " anchor basket",
                                        marker_token("topic", "anime") + " candle drawer"},
                                       "cluster by topic");
  std::string merged = oracle_propose(prompt, OracleDistractors::kMerged);
  CHECK(merged.find("has a topic of sports or anime") != std::string::npos);
  std::string full = oracle_propose(prompt, OracleDistractors::kMergedPartial);
  CHECK(full.find("has a topic of sports or anime") != std::string::npos);
  CHECK(full.find("has a topic of sports and mentions 'anchor'") != std::string::npos);
}

TEST_CASE("oracle proposer orders values by first appearance") {
  std::string prompt = proposal_prompt({marker_token("language", "english") + " anchor",
                                        marker_token("language", "french") + " basket",
                                        marker_token("language", "english") + " candle"},
                                       "cluster by language");
  std::string response = oracle_propose(prompt, OracleDistractors::kNone);
  std::size_t english = response.find("english");
  std::size_t french = response.find("french");
  REQUIRE(english != std::string::npos);
  REQUIRE(french != std::string::npos);
  CHECK(english < french);
  CHECK(response.find("Explanation 3.") == std::string::npos);
}

TEST_CASE("oracle proposer rejects goals naming no dimension") {
  std::string prompt =
      proposal_prompt({marker_token("topic", "sports") + " anchor"}, "cluster by sentiment");
  CHECK_THROWS_AS(oracle_propose(prompt, OracleDistractors::kNone), BackendError);
}

TEST_CASE("oracle proposer resolves augmented goals to an unused dimension") {
  std::string goal =
      "My goal is to cluster by topic. Now we have gathered the samples that fall under the "
      "following category: has a topic of sports, and I want to create finer-grained cluster "
      "descriptions that fall under the above category.";
  std::string prompt = proposal_prompt(
      {marker_token("topic", "sports") + " " + marker_token("subtopic", "indoor") + " anchor",
       marker_token("topic", "sports") + " " + marker_token("subtopic", "outdoor") + " basket"},
      goal);
  std::string response = oracle_propose(prompt, OracleDistractors::kNone);
  CHECK(response.find("has a subtopic of indoor") != std::string::npos);
  CHECK(response.find("has a subtopic of outdoor") != std::string::npos);
  CHECK(response.find("has a topic of") == std::string::npos);
}

TEST_CASE("oracle assigner answers by marker containment") {
  OracleAssigner assigner;
  std::string text_sports = marker_token("topic", "sports") + " anchor";
  std::string text_anime = marker_token("topic", "anime") + " anchor";
  CHECK(assigner.complete({assign_prompt("has a topic of sports", text_sports), 8, 0.0, {}}) ==
        "Yes");
  CHECK(assigner.complete({assign_prompt("has a topic of sports", text_anime), 8, 0.0, {}}) ==
        "No");
  CHECK_THROWS_AS(assigner.complete({"free-form question", 8, 0.0, {}}), BackendError);
}

TEST_CASE("oracle backends are deterministic") {
  std::string prompt = proposal_prompt({marker_token("topic", "sports") + " anchor basket",
                                        marker_token("topic", "anime") + " candle drawer"},
                                       "cluster by topic");
  OracleProposer a(OracleDistractors::kMergedPartial);
  OracleProposer b(OracleDistractors::kMergedPartial);
  CHECK(a.complete({prompt, 256, 0.7, {}}) == b.complete({prompt, 256, 0.7, {}}));
  CHECK(a.complete({prompt, 256, 0.7, {}}) == a.complete({prompt, 256, 0.7, {}}));
}

TEST_CASE("oracle committer picks the first matching predicate") {
  OracleCommitter committer;
  std::string text = marker_token("topic", "anime") + " anchor";
  std::string prompt = "Predicate 0: has a topic of sports\nPredicate 1: has a topic of anime\n"
                       "Text: " + text + "\nChoose the Predicate the matches the Text the most.";
  CHECK(committer.complete({prompt, 16, 0.0, {}}) == "Predicate 1");
  std::string none = "Predicate 0: has a topic of tech\nPredicate 1: has a topic of finance\n"
                     "Text: " + text + "\nChoose the Predicate the matches the Text the most.";
  CHECK(committer.complete({none, 16, 0.0, {}}) == "Predicate 0");
}
