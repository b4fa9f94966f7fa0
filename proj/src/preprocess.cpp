#include "wander/preprocess.hpp"

#include <algorithm>
#include <utility>

namespace wander {

void PreprocessConfig::validate() const {
  if (!(epsilon_s > 0.0)) throw InputError("preprocess: epsilon > 0 violated");
  if (!(xi_prime_m > 0.0)) throw InputError("preprocess: xi_prime > 0 violated");
  if (!(xi_prime_m < alpha_m)) throw InputError("preprocess: xi_prime < alpha violated");
  if (!(alpha_m < gamma_m)) throw InputError("preprocess: alpha < gamma violated");
  if (!(max_abs_accel > 0.0)) throw InputError("preprocess: max_abs_accel > 0 violated");
}

NoiseVerdict filter_noise(const GeoPoint& prev, double prev_speed, const GeoPoint& cur,
                          const PreprocessConfig& cfg) {
  const Kinematics k = kinematics(prev, prev_speed, cur);
  return k.abs_acceleration > cfg.max_abs_accel ? NoiseVerdict::drop : NoiseVerdict::keep;
}

bool splits_block(const GeoPoint& prev, const GeoPoint& cur, const PreprocessConfig& cfg) {
  return cur.timestamp - prev.timestamp >= cfg.epsilon_s || haversine(prev, cur) >= cfg.gamma_m;
}

StayPoint make_stay_point(std::span<const GeoPoint> run) {
  const LatLon m = median_point(run);
  return {m.lat, m.lon, run.front().timestamp, run.back().timestamp - run.front().timestamp};
}

std::optional<StayPoint> contract(std::span<const GeoPoint> buffer, const GeoPoint& next,
                                  const PreprocessConfig& cfg) {
  const LatLon current = median_point(buffer);
  bool absorb = haversine(current, next.pos()) < cfg.xi_prime_m;
  if (absorb) {
    std::vector<GeoPoint> grown(buffer.begin(), buffer.end());
    grown.push_back(next);
    const LatLon updated = median_point(grown);
    absorb = std::all_of(grown.begin(), grown.end(), [&](const GeoPoint& p) {
      return haversine(updated, p.pos()) < cfg.alpha_m;
    });
  }
  if (absorb) return std::nullopt;
  return make_stay_point(buffer);
}

StreamPreprocessor::StreamPreprocessor(std::string person_id, PreprocessConfig cfg)
    : cfg_(cfg), block_{std::move(person_id), {}, false} {
  cfg_.validate();
}

IngestEvents StreamPreprocessor::ingest(const GeoPoint& p) {
  if (!is_valid(p)) throw InputError("ingest: invalid point");
  if (last_seen_time_ && !(p.timestamp > *last_seen_time_))
    throw OutOfOrderError("ingest: point not later than its predecessor");

  IngestEvents ev;
  double speed = 0.0;
  if (last_kept_) {
    const Kinematics k = kinematics(*last_kept_, last_speed_, p);
    if (k.abs_acceleration > cfg_.max_abs_accel) {
      last_seen_time_ = p.timestamp;
      ev.dropped = true;
      return ev;
    }
    speed = k.speed;
  }

  if (last_kept_ && splits_block(*last_kept_, p, cfg_)) {
    if (!buffer_.empty()) {
      ev.stay_point = make_stay_point(buffer_);
      block_.points.push_back(*ev.stay_point);
    }
    block_.open = false;
    ev.block_closed = std::exchange(block_, Block{block_.person_id, {}, true});
    buffer_.assign(1, p);
  } else if (buffer_.empty()) {
    block_.open = true;
    buffer_.assign(1, p);
  } else if (auto flushed = contract(buffer_, p, cfg_)) {
    block_.points.push_back(*flushed);
    ev.stay_point = flushed;
    buffer_.assign(1, p);
  } else {
    buffer_.push_back(p);
  }

  last_kept_ = p;
  last_speed_ = speed;
  last_seen_time_ = p.timestamp;
  return ev;
}

std::optional<Block> StreamPreprocessor::finish() {
  if (buffer_.empty() && block_.points.empty()) return std::nullopt;
  if (!buffer_.empty()) block_.points.push_back(make_stay_point(buffer_));
  buffer_.clear();
  block_.open = false;
  return std::exchange(block_, Block{block_.person_id, {}, false});
}

namespace {

std::vector<StayPoint> contract_run(std::span<const GeoPoint> run, const PreprocessConfig& cfg) {
  std::vector<StayPoint> out;
  std::size_t start = 0;
  while (start < run.size()) {
    std::size_t end = start + 1;  // exclusive
    while (end < run.size() && !contract(run.subspan(start, end - start), run[end], cfg)) ++end;
    out.push_back(make_stay_point(run.subspan(start, end - start)));
    start = end;
  }
  return out;
}

void require_sorted(std::span<const GeoPoint> raw) {
  for (std::size_t i = 1; i < raw.size(); ++i)
    if (!(raw[i].timestamp > raw[i - 1].timestamp))
      throw InputError("raw points are not strictly sorted by timestamp");
}

std::vector<GeoPoint> drop_noise(std::span<const GeoPoint> raw, const PreprocessConfig& cfg) {
  std::vector<GeoPoint> kept;
  kept.reserve(raw.size());
  double speed = 0.0;
  for (const auto& p : raw) {
    if (!kept.empty()) {
      const Kinematics k = kinematics(kept.back(), speed, p);
      if (k.abs_acceleration > cfg.max_abs_accel) continue;
      speed = k.speed;
    }
    kept.push_back(p);
  }
  return kept;
}

}  // namespace

std::vector<Block> compress_stream(std::span<const GeoPoint> raw, const PreprocessConfig& cfg,
                                   const std::string& person_id) {
  cfg.validate();
  require_sorted(raw);
  const std::vector<GeoPoint> kept = drop_noise(raw, cfg);

  std::vector<Block> blocks;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= kept.size(); ++i) {
    if (i == kept.size() || splits_block(kept[i - 1], kept[i], cfg)) {
      const std::span<const GeoPoint> run(kept.data() + start, i - start);
      blocks.push_back({person_id, contract_run(run, cfg), false});
      start = i;
    }
  }
  return blocks;
}

Block compress_block(std::span<const GeoPoint> raw, const PreprocessConfig& cfg,
                     const std::string& person_id) {
  auto blocks = compress_stream(raw, cfg, person_id);
  if (blocks.empty()) return Block{person_id, {}, false};
  if (blocks.size() > 1) throw InputError("compress_block: input spans more than one block");
  return std::move(blocks.front());
}

}  // namespace wander
