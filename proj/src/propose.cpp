#include "goalclust/propose.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "goalclust/rng.hpp"

namespace goalclust {
namespace {

constexpr std::string_view kSimpleTemplate =
    "{samples}\n"
    "\n"
    "Goal: {goal}\n"
    "\n"
    "Generate a list of {j_prime} explanations for candidate clusters based on the samples. "
    "Respond with one explanation per line, formatted as \"Explanation <i>. <explanation>\". "
    "Each explanation must be a predicate that is true or false for a single sample.\n";

constexpr std::string_view kDetailedTemplate =
    "{samples}\n"
    "\n"
    "Goal: {goal}\n"
    "\n"
    "Generate a list of {j_prime} explanations for candidate clusters based on the samples. "
    "Respond with one explanation per line, formatted as \"Explanation <i>. <explanation>\". "
    "Each explanation must be a detailed predicate: begin with a short phrase naming the "
    "cluster, elaborate after \"; specifically,\" on which samples should or should not belong "
    "to it, and close with one short quote from a matching sample, as in \"Explanation 1. "
    "mentions pricing concerns; specifically, the sample complains that the product costs more "
    "than it is worth. For example, 'way too expensive for what you get.'\".\n";

std::string replace_all(std::string text, std::string_view placeholder, std::string_view value) {
  std::size_t pos = 0;
  while ((pos = text.find(placeholder, pos)) != std::string::npos) {
    text.replace(pos, placeholder.size(), value);
    pos += value.size();
  }
  return text;
}

std::string render_template(const PromptTemplate& tmpl, std::string_view samples_block,
                            const std::string& goal, int j_prime) {
  std::string out = replace_all(tmpl.text, "{samples}", samples_block);
  out = replace_all(std::move(out), "{goal}", goal);
  return replace_all(std::move(out), "{j_prime}", std::to_string(j_prime));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool istarts_with(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

}  // namespace

PromptTemplate PromptTemplate::builtin(TemplateKind kind) {
  return PromptTemplate{std::string(kind == TemplateKind::kSimple ? kSimpleTemplate
                                                                  : kDetailedTemplate)};
}

PromptTemplate PromptTemplate::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read prompt template: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (text.find("{samples}") == std::string::npos || text.find("{goal}") == std::string::npos) {
    throw ValidationError("prompt template must contain {samples} and {goal} placeholders: " +
                          path);
  }
  return PromptTemplate{std::move(text)};
}

int approx_token_length(std::string_view s) {
  return static_cast<int>((s.size() + 3) / 4);
}

ProposalPrompt build_proposal_prompt(const std::vector<Sample>& samples, const std::string& goal,
                                     int j_prime, int budget, const PromptTemplate& tmpl,
                                     LengthFn measure) {
  if (samples.empty()) throw ValidationError("build_proposal_prompt: samples must be non-empty");
  if (j_prime < 1) throw ValidationError("build_proposal_prompt: j_prime must be >= 1");
  const double limit = 0.75 * budget;

  ProposalPrompt prompt;
  prompt.goal = goal;
  prompt.requested_count = j_prime;

  std::string block;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::string line = "Sample " + std::to_string(i + 1) + ". " + samples[i].text;
    std::string candidate = block.empty() ? line : block + "\n" + line;
    std::string rendered = render_template(tmpl, candidate, goal, j_prime);
    if (measure(rendered) > limit) break;
    block = std::move(candidate);
    prompt.sample_ids.push_back(samples[i].id);
  }
  if (prompt.sample_ids.empty()) {
    throw ValidationError("build_proposal_prompt: budget " + std::to_string(budget) +
                          " too small to fit even one sample");
  }
  prompt.rendered = render_template(tmpl, block, goal, j_prime);
  return prompt;
}

std::vector<Explanation> parse_explanations(const std::string& response) {
  std::vector<Explanation> items;
  std::istringstream in(response);
  std::string raw;
  while (std::getline(in, raw)) {
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    bool is_item = false;
    // markdown bullet
    if (line.front() == '-' || line.front() == '*') {
      line = trim(line.substr(1));
      is_item = true;
    }
    if (istarts_with(line, "explanation") &&
        (line.size() == 11 || std::isspace(static_cast<unsigned char>(line[11])))) {
      line = trim(line.substr(11));
    }
    std::size_t digits = 0;
    while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) {
      ++digits;
    }
    if (digits > 0 && digits < line.size() &&
        (line[digits] == '.' || line[digits] == ')' || line[digits] == ':')) {
      line = trim(line.substr(digits + 1));
      is_item = true;
    }
    if (!is_item) continue;
    if (line.empty()) continue;
    Explanation e;
    e.text = std::string(line);
    e.origin.position = static_cast<int>(items.size());
    items.push_back(std::move(e));
  }
  if (items.empty()) {
    throw ParseError("no explanations found in proposer response");
  }
  return items;
}

ProposeResult propose_candidates(const ClusteringTask& task, const std::vector<Sample>& focus,
                                 Backend& proposer, int iteration,
                                 const std::vector<Explanation>& existing,
                                 const ProposeOptions& options) {
  if (focus.empty()) throw ValidationError("propose_candidates: focus must be non-empty");
  const int quota = options.quota > 0
                        ? options.quota
                        : (task.j_total + task.iterations - 1) / task.iterations;

  std::unordered_set<std::string> seen;
  for (const Explanation& e : existing) seen.insert(ascii_lower(e.text));

  ProposeResult result;
  const int parallelism = std::max(1, options.parallelism);
  bool stop = false;
  for (int pass = 0; !stop; ++pass) {
    std::vector<Sample> order = focus;
    std::mt19937_64 rng = seeded_rng(derive_seed(task.seed, static_cast<std::uint64_t>(iteration),
                                                 static_cast<std::uint64_t>(pass)));
    shuffle_in_place(order, rng);

    // Partition this pass into budget-bounded prompts up front.
    std::vector<ProposalPrompt> prompts;
    std::size_t idx = 0;
    while (idx < order.size() &&
           result.prompts_sent + static_cast<int>(prompts.size()) < options.max_prompts) {
      std::vector<Sample> rest(order.begin() + static_cast<std::ptrdiff_t>(idx), order.end());
      prompts.push_back(build_proposal_prompt(rest, task.goal, task.j_per_prompt,
                                              task.context_budget, options.tmpl, options.measure));
      idx += prompts.back().sample_ids.size();
    }
    if (prompts.empty()) break;  // prompt cap exhausted

    const std::size_t added_before_pass = result.added.size();
    const int pass_base = result.prompts_sent;
    std::size_t next = 0;
    while (next < prompts.size() && !stop) {
      const std::size_t batch =
          std::min<std::size_t>(static_cast<std::size_t>(parallelism), prompts.size() - next);
      std::vector<std::string> responses(batch);
      std::vector<std::exception_ptr> errors(batch);
      if (batch == 1) {
        try {
          responses[0] = proposer.complete({prompts[next].rendered, options.max_tokens,
                                            options.temperature, {}});
        } catch (...) {
          errors[0] = std::current_exception();
        }
      } else {
        std::vector<std::thread> workers;
        workers.reserve(batch);
        for (std::size_t i = 0; i < batch; ++i) {
          workers.emplace_back([&, i] {
            try {
              responses[i] = proposer.complete({prompts[next + i].rendered, options.max_tokens,
                                                options.temperature, {}});
            } catch (...) {
              errors[i] = std::current_exception();
            }
          });
        }
        for (std::thread& w : workers) w.join();
      }
      for (std::size_t i = 0; i < batch; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
      }

      // Assemble in prompt order so the pool is identical for any
      // parallelism: responses past the quota point are discarded.
      for (std::size_t i = 0; i < batch; ++i) {
        ++result.prompts_sent;
        if (stop) continue;
        std::vector<Explanation> parsed;
        try {
          parsed = parse_explanations(responses[i]);
        } catch (const ParseError&) {
          ++result.malformed_responses;
          continue;
        }
        for (Explanation& e : parsed) {
          if (!seen.insert(ascii_lower(e.text)).second) continue;
          e.origin.iteration = iteration;
          e.origin.prompt_index = pass_base + static_cast<int>(next + i);
          result.added.push_back(std::move(e));
        }
        if (static_cast<int>(result.added.size()) >= quota) {
          stop = true;
          result.quota_reached = true;
        }
      }
      next += batch;
    }
    if (stop) break;
    if (result.prompts_sent >= options.max_prompts) break;
    if (result.added.size() == added_before_pass) break;  // pass added nothing; backend exhausted
  }
  return result;
}

std::string augment_goal(const std::string& goal, const std::string& parent,
                         const std::string& unit) {
  if (parent.empty()) {
    throw ValidationError("augment_goal: parent explanation must be non-empty");
  }
  std::string lead = istarts_with(goal, "to ") ? "My goal is " : "My goal is to ";
  return lead + goal + ". Now we have gathered the " + unit +
         " that fall under the following category: " + parent +
         ", and I want to create finer-grained cluster descriptions that fall under the above "
         "category.";
}

}  // namespace goalclust
