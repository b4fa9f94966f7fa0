#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wander/geohash.hpp"

namespace wander {

using Item = std::uint64_t;
using ItemSequence = std::vector<Item>;

struct MinedPattern {
  std::size_t support = 0;
  ItemSequence items;

  friend bool operator==(const MinedPattern&, const MinedPattern&) = default;
};

/// Number of sequences of `db` containing `pattern` as a (gapped) subsequence.
std::size_t support_of(std::span<const ItemSequence> db, std::span<const Item> pattern);

/// Every sequential pattern with support >= eta (PrefixSpan, pseudo-projected).
std::vector<MinedPattern> prefixspan(std::span<const ItemSequence> db, std::size_t eta);

/// Keeps closed patterns of a complete frequent-pattern listing, then drops
/// every pattern that is a strict prefix of another kept one. Sorted
/// lexicographically by items.
std::vector<MinedPattern> close_and_prune(std::vector<MinedPattern> patterns);

/// Closed patterns with support >= eta, found directly with bidirectional
/// closure checking and back-scan pruning. Same set as the closed subset of
/// prefixspan(db, eta), without enumerating non-closed patterns.
std::vector<MinedPattern> mine_closed(std::span<const ItemSequence> db, std::size_t eta);

/// Removes strict prefixes of other patterns; result sorted by items.
std::vector<MinedPattern> prune_prefixes(std::vector<MinedPattern> patterns);

struct Pattern {
  std::size_t support = 0;
  std::vector<CellToken> tokens;

  friend bool operator==(const Pattern&, const Pattern&) = default;
};

/// The detector's model of normal movement.
struct PatternSet {
  std::size_t eta = 1;
  int precision = 0;
  std::uint64_t source_hash = 0;
  std::vector<Pattern> patterns;

  friend bool operator==(const PatternSet&, const PatternSet&) = default;
};

/// Order-insensitive fingerprint of a history snapshot.
std::uint64_t history_fingerprint(std::span<const GeohashSequence> history);

/// Closed, prefix-pruned patterns of the pooled history. Throws InputError
/// for eta < 1 or mixed precisions.
PatternSet mine(std::span<const GeohashSequence> history, std::size_t eta, int precision);

}  // namespace wander
