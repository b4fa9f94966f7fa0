#include "wander/mining.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace wander {

namespace {

// Suffix of db[seq] starting at pos.
struct Projection {
  std::size_t seq;
  std::size_t pos;
};

using Extensions = std::map<Item, std::vector<Projection>>;

Extensions collect_extensions(std::span<const ItemSequence> db, const std::vector<Projection>& proj) {
  Extensions ext;
  std::set<Item> seen;
  for (const auto& [s, pos] : proj) {
    seen.clear();
    const ItemSequence& seq = db[s];
    for (std::size_t k = pos; k < seq.size(); ++k)
      if (seen.insert(seq[k]).second) ext[seq[k]].push_back({s, k + 1});
  }
  return ext;
}

std::vector<Projection> full_projection(std::span<const ItemSequence> db) {
  std::vector<Projection> proj;
  proj.reserve(db.size());
  for (std::size_t s = 0; s < db.size(); ++s) proj.push_back({s, 0});
  return proj;
}

void grow_all(std::span<const ItemSequence> db, std::size_t eta, ItemSequence& prefix,
              const std::vector<Projection>& proj, std::vector<MinedPattern>& out) {
  for (const auto& [item, next] : collect_extensions(db, proj)) {
    if (next.size() < eta) continue;
    prefix.push_back(item);
    out.push_back({next.size(), prefix});
    grow_all(db, eta, prefix, next, out);
    prefix.pop_back();
  }
}

bool is_strict_prefix(const ItemSequence& p, const ItemSequence& q) {
  return p.size() < q.size() && std::equal(p.begin(), p.end(), q.begin());
}

// Positions of one pattern inside one sequence that bound its periods.
struct Appearances {
  std::vector<std::size_t> first;           // first instance
  std::vector<std::size_t> last_in_last;    // rightmost instance
  std::vector<std::size_t> last_in_first;
};

Appearances appearances(const ItemSequence& seq, const ItemSequence& pattern) {
  const std::size_t n = pattern.size();
  Appearances a;
  a.first.resize(n);
  a.last_in_last.resize(n);
  a.last_in_first.resize(n);

  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (seq[k] != pattern[i]) ++k;
    a.first[i] = k++;
  }
  // Walks back from `bound` (exclusive) to the previous occurrence of item.
  const auto last_before = [&](Item item, std::size_t bound) {
    std::size_t j = bound;
    while (seq[--j] != item) {
    }
    return j;
  };
  a.last_in_last[n - 1] = last_before(pattern[n - 1], seq.size());
  a.last_in_first[n - 1] = a.first[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    a.last_in_last[i] = last_before(pattern[i], a.last_in_last[i + 1]);
    a.last_in_first[i] = last_before(pattern[i], a.last_in_first[i + 1]);
  }
  return a;
}

// True when some period index has an item common to that period of every
// sequence. `semi` selects the semi-maximum periods (back-scan pruning)
// instead of the maximum periods (backward-extension check).
bool common_item_in_periods(std::span<const ItemSequence> db, const ItemSequence& pattern,
                            const std::vector<Projection>& proj, bool semi) {
  std::vector<Appearances> apps;
  apps.reserve(proj.size());
  for (const auto& p : proj) apps.push_back(appearances(db[p.seq], pattern));

  std::vector<Item> common, period, merged;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    bool alive = true;
    for (std::size_t s = 0; s < proj.size() && alive; ++s) {
      const ItemSequence& seq = db[proj[s].seq];
      const Appearances& a = apps[s];
      const std::size_t begin = i == 0 ? 0 : a.first[i - 1] + 1;
      const std::size_t end = semi ? a.last_in_first[i] : a.last_in_last[i];
      period.assign(seq.begin() + static_cast<std::ptrdiff_t>(begin),
                    seq.begin() + static_cast<std::ptrdiff_t>(std::max(begin, end)));
      std::sort(period.begin(), period.end());
      period.erase(std::unique(period.begin(), period.end()), period.end());
      if (s == 0) {
        common.swap(period);
      } else {
        merged.clear();
        std::set_intersection(common.begin(), common.end(), period.begin(), period.end(),
                              std::back_inserter(merged));
        common.swap(merged);
      }
      alive = !common.empty();
    }
    if (alive) return true;
  }
  return false;
}

void grow_closed(std::span<const ItemSequence> db, std::size_t eta, ItemSequence& prefix,
                 const std::vector<Projection>& proj, std::vector<MinedPattern>& out) {
  const Extensions ext = collect_extensions(db, proj);
  const bool forward_closed =
      std::none_of(ext.begin(), ext.end(), [&](const auto& e) { return e.second.size() == proj.size(); });
  if (forward_closed && !common_item_in_periods(db, prefix, proj, false)) out.push_back({proj.size(), prefix});

  for (const auto& [item, next] : ext) {
    if (next.size() < eta) continue;
    prefix.push_back(item);
    if (!common_item_in_periods(db, prefix, next, true)) grow_closed(db, eta, prefix, next, out);
    prefix.pop_back();
  }
}

}  // namespace

std::size_t support_of(std::span<const ItemSequence> db, std::span<const Item> pattern) {
  std::size_t count = 0;
  for (const auto& seq : db) {
    std::size_t k = 0;
    for (Item it : seq)
      if (k < pattern.size() && it == pattern[k]) ++k;
    if (k == pattern.size()) ++count;
  }
  return count;
}

std::vector<MinedPattern> prefixspan(std::span<const ItemSequence> db, std::size_t eta) {
  if (eta < 1) throw InputError("prefixspan: eta >= 1 violated");
  std::vector<MinedPattern> out;
  ItemSequence prefix;
  grow_all(db, eta, prefix, full_projection(db), out);
  return out;
}

std::vector<MinedPattern> prune_prefixes(std::vector<MinedPattern> patterns) {
  std::sort(patterns.begin(), patterns.end(),
            [](const MinedPattern& a, const MinedPattern& b) { return a.items < b.items; });
  std::vector<MinedPattern> kept;
  kept.reserve(patterns.size());
  // In lexicographic order every extension of P immediately follows P.
  for (std::size_t i = 0; i < patterns.size(); ++i)
    if (i + 1 == patterns.size() || !is_strict_prefix(patterns[i].items, patterns[i + 1].items))
      kept.push_back(std::move(patterns[i]));
  return kept;
}

std::vector<MinedPattern> close_and_prune(std::vector<MinedPattern> patterns) {
  std::map<ItemSequence, std::size_t> support;
  std::set<Item> alphabet;
  for (const auto& p : patterns) {
    support[p.items] = p.support;
    alphabet.insert(p.items.begin(), p.items.end());
  }
  // A pattern with an equal-support super-pattern also has one that is a
  // single item longer, so one-item insertions decide closedness.
  const auto closed = [&](const MinedPattern& p) {
    ItemSequence probe;
    for (std::size_t at = 0; at <= p.items.size(); ++at) {
      for (Item a : alphabet) {
        probe = p.items;
        probe.insert(probe.begin() + static_cast<std::ptrdiff_t>(at), a);
        const auto it = support.find(probe);
        if (it != support.end() && it->second == p.support) return false;
      }
    }
    return true;
  };
  std::erase_if(patterns, [&](const MinedPattern& p) { return !closed(p); });
  return prune_prefixes(std::move(patterns));
}

std::vector<MinedPattern> mine_closed(std::span<const ItemSequence> db, std::size_t eta) {
  if (eta < 1) throw InputError("mine_closed: eta >= 1 violated");
  std::vector<MinedPattern> out;
  ItemSequence prefix;
  for (const auto& [item, proj] : collect_extensions(db, full_projection(db))) {
    if (proj.size() < eta) continue;
    prefix.assign(1, item);
    if (!common_item_in_periods(db, prefix, proj, true)) grow_closed(db, eta, prefix, proj, out);
  }
  return out;
}

std::uint64_t history_fingerprint(std::span<const GeohashSequence> history) {
  std::vector<std::vector<CellToken>> seqs;
  seqs.reserve(history.size());
  for (const auto& h : history) seqs.push_back(h.tokens);
  std::sort(seqs.begin(), seqs.end());

  std::uint64_t hash = 0xcbf29ce484222325ULL;  // FNV-1a
  const auto mix = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      hash ^= (v >> (8 * b)) & 0xffU;
      hash *= 0x100000001b3ULL;
    }
  };
  mix(seqs.size());
  for (const auto& s : seqs) {
    mix(s.size());
    for (const auto& t : s) {
      mix(t.precision);
      mix(t.code);
    }
  }
  return hash;
}

PatternSet mine(std::span<const GeohashSequence> history, std::size_t eta, int precision) {
  if (eta < 1) throw InputError("mine: eta >= 1 violated");
  validate_precision(precision);
  std::vector<ItemSequence> db;
  db.reserve(history.size());
  for (const auto& h : history) {
    ItemSequence seq;
    seq.reserve(h.tokens.size());
    for (const auto& t : h.tokens) {
      if (t.precision != precision) throw InputError("mine: history mixes geohash precisions");
      seq.push_back(t.code);
    }
    db.push_back(std::move(seq));
  }

  PatternSet out;
  out.eta = eta;
  out.precision = precision;
  out.source_hash = history_fingerprint(history);
  for (auto& p : prune_prefixes(mine_closed(db, eta))) {
    Pattern pattern{p.support, {}};
    pattern.tokens.reserve(p.items.size());
    for (Item code : p.items) pattern.tokens.push_back({static_cast<std::uint8_t>(precision), code});
    out.patterns.push_back(std::move(pattern));
  }
  return out;
}

}  // namespace wander
