#include "goalclust/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace goalclust {
namespace {

constexpr std::string_view kCategoryScaffold = "fall under the following category:";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> alpha_tokens(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

bool contains_token_sequence(const std::vector<std::string>& haystack,
                             const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + i)) return true;
  }
  return false;
}

// Predicate parse result for the grammar in the header.
struct ParsedPredicate {
  std::string dim;
  std::vector<std::string> values;  // one, or two for a merged predicate
  std::string mention;              // non-empty for partial predicates
  bool ok = false;
};

ParsedPredicate parse_predicate(std::string_view predicate) {
  ParsedPredicate parsed;
  std::string_view rest = trim(predicate);
  if (!rest.empty() && rest.back() == '.') rest.remove_suffix(1);
  constexpr std::string_view kPrefix = "has a ";
  if (rest.substr(0, kPrefix.size()) != kPrefix) return parsed;
  rest.remove_prefix(kPrefix.size());
  std::size_t of_pos = rest.find(" of ");
  if (of_pos == std::string_view::npos) return parsed;
  parsed.dim = std::string(trim(rest.substr(0, of_pos)));
  rest = trim(rest.substr(of_pos + 4));
  constexpr std::string_view kMentions = " and mentions '";
  if (std::size_t m = rest.find(kMentions); m != std::string_view::npos) {
    std::string_view word = rest.substr(m + kMentions.size());
    if (std::size_t q = word.find('\''); q != std::string_view::npos) word = word.substr(0, q);
    parsed.mention = std::string(word);
    rest = trim(rest.substr(0, m));
  }
  if (std::size_t o = rest.find(" or "); o != std::string_view::npos) {
    parsed.values.push_back(std::string(trim(rest.substr(0, o))));
    parsed.values.push_back(std::string(trim(rest.substr(o + 4))));
  } else {
    parsed.values.push_back(std::string(rest));
  }
  parsed.ok = !parsed.dim.empty() && !parsed.values.empty() && !parsed.values.front().empty();
  return parsed;
}

}  // namespace

std::string marker_token(std::string_view dim, std::string_view value) {
  std::string token(kMarkerOpen);
  token.append(dim).append("=").append(value).append(kMarkerClose);
  return token;
}

std::vector<std::pair<std::string, std::string>> extract_markers(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> markers;
  std::size_t pos = 0;
  while ((pos = text.find(kMarkerOpen, pos)) != std::string_view::npos) {
    std::size_t body_start = pos + kMarkerOpen.size();
    std::size_t close = text.find(kMarkerClose, body_start);
    if (close == std::string_view::npos) break;
    std::string_view body = text.substr(body_start, close - body_start);
    if (std::size_t eq = body.find('='); eq != std::string_view::npos) {
      markers.emplace_back(std::string(body.substr(0, eq)), std::string(body.substr(eq + 1)));
    }
    pos = close + kMarkerClose.size();
  }
  return markers;
}

bool oracle_predicate_true(std::string_view predicate, std::string_view text) {
  ParsedPredicate parsed = parse_predicate(predicate);
  if (!parsed.ok) return false;
  bool marker_hit = false;
  for (const std::string& value : parsed.values) {
    if (text.find(marker_token(parsed.dim, value)) != std::string_view::npos) {
      marker_hit = true;
      break;
    }
  }
  if (!marker_hit) return false;
  if (!parsed.mention.empty() && text.find(parsed.mention) == std::string_view::npos) return false;
  return true;
}

std::string oracle_propose(std::string_view prompt, OracleDistractors distractors) {
  std::size_t goal_pos = prompt.find("Goal:");
  if (goal_pos == std::string_view::npos) {
    throw BackendError("oracle proposer: prompt has no Goal line");
  }
  std::size_t goal_end = prompt.find('\n', goal_pos);
  std::string_view goal = trim(prompt.substr(
      goal_pos + 5, (goal_end == std::string_view::npos ? prompt.size() : goal_end) - goal_pos - 5));

  // Observed dimensions and values, both in first-appearance order.
  std::vector<std::string> dim_order;
  std::vector<std::vector<std::string>> value_order;
  for (const auto& [dim, value] : extract_markers(prompt)) {
    auto it = std::find(dim_order.begin(), dim_order.end(), dim);
    std::size_t idx;
    if (it == dim_order.end()) {
      dim_order.push_back(dim);
      value_order.emplace_back();
      idx = dim_order.size() - 1;
    } else {
      idx = static_cast<std::size_t>(it - dim_order.begin());
    }
    auto& values = value_order[idx];
    if (std::find(values.begin(), values.end(), value) == values.end()) values.push_back(value);
  }

  // Goals produced by recursive runs embed parent predicates; their
  // dimensions are already resolved one level up and must not be re-proposed.
  bool augmented = goal.find(kCategoryScaffold) != std::string_view::npos;
  std::vector<std::string> excluded;
  if (augmented) {
    std::string_view g = goal;
    std::size_t pos = 0;
    while ((pos = g.find("has a ", pos)) != std::string_view::npos) {
      std::size_t of_pos = g.find(" of ", pos);
      if (of_pos == std::string_view::npos) break;
      excluded.emplace_back(trim(g.substr(pos + 6, of_pos - pos - 6)));
      pos = of_pos + 4;
    }
  }

  const std::vector<std::string> goal_tokens = alpha_tokens(goal);
  int chosen = -1;
  for (std::size_t i = 0; i < dim_order.size(); ++i) {
    if (std::find(excluded.begin(), excluded.end(), dim_order[i]) != excluded.end()) continue;
    if (contains_token_sequence(goal_tokens, alpha_tokens(dim_order[i]))) {
      chosen = static_cast<int>(i);
      break;
    }
  }
  if (chosen < 0 && augmented) {
    for (std::size_t i = 0; i < dim_order.size(); ++i) {
      if (std::find(excluded.begin(), excluded.end(), dim_order[i]) == excluded.end()) {
        chosen = static_cast<int>(i);
        break;
      }
    }
  }
  if (chosen < 0) {
    throw BackendError("oracle proposer: goal names no known dimension: " + std::string(goal));
  }

  const std::string& dim = dim_order[chosen];
  const std::vector<std::string>& values = value_order[chosen];
  std::ostringstream out;
  int n = 0;
  for (const std::string& value : values) {
    out << "Explanation " << ++n << ". has a " << dim << " of " << value << "\n";
  }
  if (distractors != OracleDistractors::kNone && values.size() >= 2) {
    out << "Explanation " << ++n << ". has a " << dim << " of " << values[0] << " or " << values[1]
        << "\n";
  }
  if (distractors == OracleDistractors::kMergedPartial) {
    // Partial distractor: restrict the first value by a word drawn from the
    // first sample carrying it, so the predicate covers that value only partly.
    std::string token = marker_token(dim, values[0]);
    std::size_t at = prompt.find(token);
    if (at != std::string_view::npos) {
      std::size_t pos = at + token.size();
      std::size_t line_end = prompt.find('\n', pos);
      if (line_end == std::string_view::npos) line_end = prompt.size();
      std::string word;
      while (pos < line_end) {
        if (prompt.compare(pos, kMarkerOpen.size(), kMarkerOpen) == 0) {
          std::size_t close = prompt.find(kMarkerClose, pos);
          if (close == std::string_view::npos || close >= line_end) break;
          pos = close + kMarkerClose.size();
          continue;
        }
        if (std::isalpha(static_cast<unsigned char>(prompt[pos]))) {
          std::size_t start = pos;
          while (pos < line_end && std::isalpha(static_cast<unsigned char>(prompt[pos]))) ++pos;
          if (pos - start >= 3) {
            word = std::string(prompt.substr(start, pos - start));
            break;
          }
        } else {
          ++pos;
        }
      }
      if (!word.empty()) {
        out << "Explanation " << ++n << ". has a " << dim << " of " << values[0]
            << " and mentions '" << word << "'\n";
      }
    }
  }
  return out.str();
}

OracleProposer::OracleProposer(OracleDistractors distractors)
    : Backend(BackendId{BackendKind::kOracleKeyword, "proposer", ""}), distractors_(distractors) {}

std::string OracleProposer::do_complete(const CompletionRequest& request) {
  return oracle_propose(request.prompt, distractors_);
}

OracleAssigner::OracleAssigner()
    : Backend(BackendId{BackendKind::kOracleKeyword, "assigner", ""}) {}

std::string OracleAssigner::do_complete(const CompletionRequest& request) {
  const std::string& prompt = request.prompt;
  constexpr std::string_view kPredicate = "Predicate: ";
  constexpr std::string_view kText = "\nText: ";
  std::size_t p = prompt.find(kPredicate);
  std::size_t t = prompt.find(kText);
  if (p == std::string::npos || t == std::string::npos || t < p) {
    throw BackendError("oracle assigner: prompt is not an assignment prompt");
  }
  std::string_view predicate = trim(std::string_view(prompt).substr(
      p + kPredicate.size(), t - p - kPredicate.size()));
  std::size_t text_start = t + kText.size();
  std::size_t text_end = prompt.find("\nIs the Predicate", text_start);
  if (text_end == std::string::npos) text_end = prompt.size();
  std::string_view text = std::string_view(prompt).substr(text_start, text_end - text_start);
  return oracle_predicate_true(predicate, text) ? "Yes" : "No";
}

OracleCommitter::OracleCommitter()
    : Backend(BackendId{BackendKind::kOracleKeyword, "committer", ""}) {}

std::string OracleCommitter::do_complete(const CompletionRequest& request) {
  // Commit prompts list "Predicate <i>: <text>" lines followed by the sample.
  std::vector<std::string> predicates;
  std::string text;
  std::istringstream in(request.prompt);
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = trim(line);
    if (view.substr(0, 10) == "Predicate ") {
      std::size_t colon = view.find(':');
      if (colon != std::string_view::npos) {
        predicates.emplace_back(trim(view.substr(colon + 1)));
      }
    } else if (view.substr(0, 6) == "Text: ") {
      text = std::string(view.substr(6));
    }
  }
  if (predicates.empty() || text.empty()) {
    throw BackendError("oracle committer: prompt is not a commit prompt");
  }
  for (std::size_t i = 0; i < predicates.size(); ++i) {
    if (oracle_predicate_true(predicates[i], text)) {
      return "Predicate " + std::to_string(i);
    }
  }
  return "Predicate 0";
}

}  // namespace goalclust
