#include "chromatic/history_log.hpp"

#include <atomic>
#include <charconv>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "history_internal.hpp"

namespace chromatic::history {

namespace {

std::atomic<bool> g_enabled{false};
std::mutex g_mutex;
ScxHistory g_log;

std::uint64_t id_of(const Record* r) { return r == nullptr ? 0 : r->id; }

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || s.empty())
    throw std::invalid_argument("history: bad integer '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> words(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view strip_prefix(std::string_view s, std::string_view prefix) {
  if (!s.starts_with(prefix))
    throw std::invalid_argument("history: expected '" + std::string(prefix) +
                                "' in '" + std::string(s) + "'");
  return s.substr(prefix.size());
}

}  // namespace

void set_enabled(bool on) { g_enabled.store(on); }
bool enabled() noexcept { return g_enabled.load(std::memory_order_relaxed); }

void clear() {
  std::lock_guard lock(g_mutex);
  g_log = {};
}

ScxHistory capture() {
  std::lock_guard lock(g_mutex);
  return g_log;
}

std::uint64_t commit_count() {
  std::lock_guard lock(g_mutex);
  return g_log.commits.size();
}

void note_initial(const Record& r) {
  if (!enabled()) return;
  std::lock_guard lock(g_mutex);
  g_log.initial.push_back({r.id, id_of(r.child[0].load()), id_of(r.child[1].load())});
}

void note_traversal(std::uint64_t node, std::uint64_t begin,
                    std::uint64_t end) {
  if (!enabled()) return;
  std::lock_guard lock(g_mutex);
  g_log.traversals.push_back({node, begin, end});
}

std::string to_text(const ScxHistory& h) {
  std::ostringstream out;
  for (const InitialRecord& r : h.initial)
    out << "init " << r.id << ' ' << r.left << ' ' << r.right << '\n';
  for (const CommittedScx& c : h.commits) {
    out << "scx " << c.seq << ' ' << c.target << ' ' << c.slot << ' '
        << c.old_value << ' ' << c.new_value << " R=";
    if (c.removed.empty()) out << '-';
    for (std::size_t i = 0; i < c.removed.size(); ++i)
      out << (i ? "," : "") << c.removed[i];
    out << " N=";
    if (c.fresh.empty()) out << '-';
    for (std::size_t i = 0; i < c.fresh.size(); ++i)
      out << (i ? "," : "") << c.fresh[i].id << ':' << c.fresh[i].left << ':'
          << c.fresh[i].right;
    out << '\n';
  }
  for (const TraversalRecord& t : h.traversals)
    out << "trav " << t.node << ' ' << t.begin << ' ' << t.end << '\n';
  return out.str();
}

ScxHistory parse(std::string_view text) {
  ScxHistory h;
  for (std::string_view line : split(text, '\n')) {
    const auto w = words(line);
    if (w.empty()) continue;
    if (w[0] == "init") {
      if (w.size() != 4) throw std::invalid_argument("history: bad init line");
      h.initial.push_back({parse_u64(w[1]), parse_u64(w[2]), parse_u64(w[3])});
    } else if (w[0] == "trav") {
      if (w.size() != 4) throw std::invalid_argument("history: bad trav line");
      h.traversals.push_back(
          {parse_u64(w[1]), parse_u64(w[2]), parse_u64(w[3])});
    } else if (w[0] == "scx") {
      if (w.size() != 8) throw std::invalid_argument("history: bad scx line");
      CommittedScx c;
      c.seq = parse_u64(w[1]);
      c.target = parse_u64(w[2]);
      c.slot = static_cast<std::uint32_t>(parse_u64(w[3]));
      c.old_value = parse_u64(w[4]);
      c.new_value = parse_u64(w[5]);
      const std::string_view removed = strip_prefix(w[6], "R=");
      if (removed != "-")
        for (std::string_view id : split(removed, ','))
          c.removed.push_back(parse_u64(id));
      const std::string_view fresh = strip_prefix(w[7], "N=");
      if (fresh != "-") {
        for (std::string_view item : split(fresh, ',')) {
          const auto parts = split(item, ':');
          if (parts.size() != 3)
            throw std::invalid_argument("history: bad fresh node entry");
          c.fresh.push_back(
              {parse_u64(parts[0]), parse_u64(parts[1]), parse_u64(parts[2])});
        }
      }
      h.commits.push_back(std::move(c));
    } else {
      throw std::invalid_argument("history: unknown line kind '" +
                                  std::string(w[0]) + "'");
    }
  }
  return h;
}

namespace detail {

bool update_field(std::atomic<Record*>& field, Record* old_value,
                  Record* new_value, const Record& target, std::uint32_t slot,
                  std::span<Record* const> removed,
                  std::span<Record* const> fresh) {
  if (!enabled()) {
    Record* expected = old_value;
    return field.compare_exchange_strong(expected, new_value);
  }
  std::lock_guard lock(g_mutex);
  Record* expected = old_value;
  if (!field.compare_exchange_strong(expected, new_value)) return false;
  CommittedScx c;
  c.seq = g_log.commits.size() + 1;
  c.target = target.id;
  c.slot = slot;
  c.old_value = id_of(old_value);
  c.new_value = id_of(new_value);
  for (Record* r : removed) c.removed.push_back(r->id);
  for (Record* r : fresh)
    c.fresh.push_back({r->id, id_of(r->child[0].load()), id_of(r->child[1].load())});
  g_log.commits.push_back(std::move(c));
  return true;
}

}  // namespace detail

}  // namespace chromatic::history
