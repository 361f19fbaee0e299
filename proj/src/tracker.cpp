#include "orchardsim/tracker.hpp"

#include <stdexcept>

#include "orchardsim/assignment.hpp"

namespace orchardsim {

void TrackerConfig::validate() const {
  if (!(tau_low >= 0.0 && tau_low <= tau_high && tau_high <= 1.0)) {
    throw std::invalid_argument("need 0 <= tau_low <= tau_high <= 1");
  }
  if (!(iou_min > 0.0 && iou_min <= 1.0)) throw std::invalid_argument("iou_min must lie in (0, 1]");
  if (max_age < 1) throw std::invalid_argument("max_age must be >= 1");
  if (!(gain > 0.0 && gain <= 1.0)) throw std::invalid_argument("gain must lie in (0, 1]");
}

const char* to_string(TrackState state) {
  switch (state) {
    case TrackState::active: return "active";
    case TrackState::lost: return "lost";
    case TrackState::finished: return "finished";
  }
  return "unknown";
}

namespace {

struct Live {
  std::size_t track;  // index into the output list
  double cu, cv;      // filtered centre at last_frame
  double vu = 0.0, vv = 0.0;
  double hw, hh;
  int last_frame;
  BBox predicted;
};

// Matches live[l] for l in `rows` against dets[d] for d in `cols`; returns
// pairs (row position, col position).
std::vector<std::pair<std::size_t, std::size_t>> associate(const std::vector<Live>& live,
                                                           const std::vector<std::size_t>& rows,
                                                           const std::vector<Detection>& dets,
                                                           const std::vector<std::size_t>& cols, double iou_min) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (rows.empty() || cols.empty()) return pairs;
  CostMatrix m{rows.size(), cols.size(), std::vector<double>(rows.size() * cols.size())};
  std::vector<double> ious(m.cost.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double o = iou(live[rows[r]].predicted, dets[cols[c]].bbox);
      ious[r * cols.size() + c] = o;
      // Pairs below the floor cost more than any full set of allowed pairs.
      m.cost[r * cols.size() + c] = o >= iou_min ? 1.0 - o : 1.0 + static_cast<double>(rows.size() + cols.size());
    }
  }
  const std::vector<int> match = solve_assignment(m);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (match[r] < 0) continue;
    const auto c = static_cast<std::size_t>(match[r]);
    if (ious[r * cols.size() + c] >= iou_min) pairs.emplace_back(r, c);
  }
  return pairs;
}

}  // namespace

std::vector<Track> track(const DetectionFrames& frames, const TrackerConfig& cfg) {
  cfg.validate();
  std::vector<Track> tracks;
  std::vector<Live> live;

  for (std::size_t f = 0; f < frames.size(); ++f) {
    const int frame = static_cast<int>(f);
    const std::vector<Detection>& dets = frames[f];
    for (Live& l : live) {
      const double dt = frame - l.last_frame;
      l.predicted = BBox::centered(l.cu + l.vu * dt, l.cv + l.vv * dt, l.hw, l.hh);
    }
    std::vector<std::size_t> high, low;
    for (std::size_t d = 0; d < dets.size(); ++d) {
      if (dets[d].confidence >= cfg.tau_high) {
        high.push_back(d);
      } else if (cfg.two_stage && dets[d].confidence >= cfg.tau_low) {
        low.push_back(d);
      }
    }

    std::vector<char> live_matched(live.size(), 0), det_used(dets.size(), 0);
    auto apply = [&](std::size_t li, std::size_t d) {
      Live& l = live[li];
      const Detection& det = dets[d];
      const double dt = frame - l.last_frame;
      const double cu = l.predicted.cu() + cfg.gain * (det.bbox.cu() - l.predicted.cu());
      const double cv = l.predicted.cv() + cfg.gain * (det.bbox.cv() - l.predicted.cv());
      l.vu = (cu - l.cu) / dt;
      l.vv = (cv - l.cv) / dt;
      l.cu = cu;
      l.cv = cv;
      l.hw = 0.5 * det.bbox.width();
      l.hh = 0.5 * det.bbox.height();
      l.last_frame = frame;
      tracks[l.track].detections.push_back(det);
      tracks[l.track].state = TrackState::active;
      live_matched[li] = 1;
      det_used[d] = 1;
    };

    std::vector<std::size_t> rows(live.size());
    for (std::size_t i = 0; i < live.size(); ++i) rows[i] = i;
    for (const auto& [r, c] : associate(live, rows, dets, high, cfg.iou_min)) apply(rows[r], high[c]);

    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < live.size(); ++i) {
      if (!live_matched[i]) rest.push_back(i);
    }
    for (const auto& [r, c] : associate(live, rest, dets, low, cfg.iou_min)) apply(rest[r], low[c]);

    std::vector<Live> next;
    for (std::size_t i = 0; i < live.size(); ++i) {
      if (live_matched[i]) {
        next.push_back(live[i]);
      } else if (frame - live[i].last_frame >= cfg.max_age) {
        tracks[live[i].track].state = TrackState::finished;
      } else {
        tracks[live[i].track].state = TrackState::lost;
        next.push_back(live[i]);
      }
    }
    for (std::size_t d : high) {
      if (det_used[d]) continue;
      const Detection& det = dets[d];
      Track t;
      t.track_id = static_cast<int>(tracks.size());
      t.detections.push_back(det);
      next.push_back({tracks.size(), det.bbox.cu(), det.bbox.cv(), 0.0, 0.0, 0.5 * det.bbox.width(),
                      0.5 * det.bbox.height(), frame, det.bbox});
      tracks.push_back(std::move(t));
    }
    live = std::move(next);
  }
  return tracks;
}

nlohmann::json to_json(const Track& t) {
  nlohmann::json dets = nlohmann::json::array();
  for (const Detection& d : t.detections) dets.push_back(to_json(d));
  return {{"track_id", t.track_id}, {"state", to_string(t.state)}, {"detections", dets}};
}

}  // namespace orchardsim
