#include "goalclust/assign.hpp"

#include <atomic>
#include <cctype>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace goalclust {

std::string build_assign_prompt(const Explanation& explanation, const Sample& sample) {
  if (explanation.text.empty()) {
    throw ValidationError("build_assign_prompt: predicate must be non-empty");
  }
  if (sample.text.empty()) {
    throw ValidationError("build_assign_prompt: sample text must be non-empty");
  }
  return "Predicate: " + explanation.text + "\nText: " + sample.text +
         "\nIs the Predicate true on the Text? Yes or No. When uncertain, output No.";
}

AssignVerdict parse_assignment(std::string_view response) {
  std::size_t pos = 0;
  while (pos < response.size() && !std::isalpha(static_cast<unsigned char>(response[pos]))) ++pos;
  std::size_t end = pos;
  while (end < response.size() && std::isalpha(static_cast<unsigned char>(response[end]))) ++end;
  std::string token = ascii_lower(response.substr(pos, end - pos));
  if (token == "yes") return AssignVerdict::kYes;
  if (token == "no") return AssignVerdict::kNo;
  return AssignVerdict::kUnparseable;
}

JudgmentCache::JudgmentCache(const std::string& path) {
  {
    std::ifstream in(path);
    std::string line;
    while (in && std::getline(in, line)) {
      if (line.empty()) continue;
      nlohmann::json record = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
      if (record.is_discarded() || !record.contains("eh") || !record.contains("sid") ||
          !record.contains("bid") || !record.contains("v")) {
        continue;  // tolerate a torn trailing record from an aborted run
      }
      entries_[key(record["eh"], record["sid"], record["bid"])] = record["v"].get<int>();
    }
  }
  out_ = std::make_unique<std::ofstream>(path, std::ios::app);
  if (!*out_) throw IoError("cannot open judgment cache for appending: " + path);
}

std::string JudgmentCache::key(const std::string& eh, const std::string& sid,
                               const std::string& bid) {
  return eh + "\x1f" + sid + "\x1f" + bid;
}

std::optional<int> JudgmentCache::lookup(const std::string& eh, const std::string& sid,
                                         const std::string& bid) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = entries_.find(key(eh, sid, bid));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void JudgmentCache::insert(const std::string& eh, const std::string& sid, const std::string& bid,
                           int verdict) {
  nlohmann::json record{{"eh", eh},
                        {"sid", sid},
                        {"bid", bid},
                        {"v", verdict},
                        {"ts", static_cast<std::int64_t>(std::time(nullptr))}};
  std::lock_guard<std::mutex> lock(mu_);
  entries_[key(eh, sid, bid)] = verdict;
  if (out_) {
    *out_ << record.dump() << '\n';
    out_->flush();  // one record per line, flushed, so aborts lose at most a torn tail
  }
}

std::size_t JudgmentCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

AssignmentMatrix assign_matrix(const std::vector<Sample>& corpus,
                               const std::vector<Explanation>& pool, Backend& assigner,
                               JudgmentCache& cache, int parallelism, AssignStats* stats) {
  if (pool.empty()) throw ValidationError("assign_matrix: explanation pool must be non-empty");

  std::vector<std::string> row_ids;
  row_ids.reserve(corpus.size());
  for (const Sample& s : corpus) row_ids.push_back(s.id);
  AssignmentMatrix matrix(std::move(row_ids), pool);

  const std::string backend_id = assigner.id_string();
  std::vector<std::string> column_hashes;
  column_hashes.reserve(pool.size());
  for (const Explanation& e : pool) column_hashes.push_back(JudgmentCache::explanation_hash(e.text));

  // Resolve cache hits first; everything else goes to the backend.
  struct Pending {
    int x;
    int j;
  };
  std::vector<Pending> pending;
  AssignStats local;
  for (int x = 0; x < static_cast<int>(corpus.size()); ++x) {
    for (int j = 0; j < static_cast<int>(pool.size()); ++j) {
      if (std::optional<int> v = cache.lookup(column_hashes[j], corpus[x].id, backend_id)) {
        matrix.set(x, j, *v != 0);
        ++local.cache_hits;
      } else {
        pending.push_back({x, j});
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::atomic<std::uint64_t> unparseable{0};
  std::atomic<bool> failed{false};
  std::mutex error_mu;
  std::exception_ptr error;

  auto worker = [&] {
    while (!failed.load()) {
      std::size_t i = next.fetch_add(1);
      if (i >= pending.size()) return;
      const Pending& p = pending[i];
      try {
        std::string prompt = build_assign_prompt(pool[p.j], corpus[p.x]);
        std::string response = assigner.complete({prompt, /*max_tokens=*/8, /*temperature=*/0.0, {}});
        AssignVerdict verdict = parse_assignment(response);
        if (verdict == AssignVerdict::kUnparseable) unparseable.fetch_add(1);
        int value = verdict == AssignVerdict::kYes ? 1 : 0;
        matrix.set(p.x, p.j, value != 0);
        cache.insert(column_hashes[p.j], corpus[p.x].id, backend_id, value);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  const int workers = std::max(1, std::min<int>(parallelism, static_cast<int>(pending.size())));
  if (workers <= 1 || pending.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);

  local.backend_calls = pending.size();
  local.unparseable = unparseable.load();
  if (stats) *stats = local;
  return matrix;
}

std::set<std::string> cluster_of(const AssignmentMatrix& matrix, int j) {
  if (j < 0 || j >= matrix.n_cols()) {
    throw ValidationError("cluster_of: column index " + std::to_string(j) + " out of range");
  }
  std::set<std::string> members;
  for (int x = 0; x < matrix.n_samples(); ++x) {
    if (matrix.at(x, j)) members.insert(matrix.row_ids()[x]);
  }
  return members;
}

}  // namespace goalclust
