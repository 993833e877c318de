// Prints one PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "mexpr/codec.hpp"
#include "mexpr/composition.hpp"
#include "mexpr/error.hpp"
#include "mexpr/face_preparation.hpp"
#include "mexpr/json_io.hpp"
#include "mexpr/project_store.hpp"
#include "mexpr/reenactment.hpp"
#include "mexpr/service.hpp"
#include "mexpr/session.hpp"
#include "support/support.hpp"

using namespace mexpr;
using namespace mexpr::testing;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

// ---- shared inputs -------------------------------------------------------

struct PanelCase {
  Bytes png;
  RasterImage image;
  bool automatic = false;
  BBox face;  // landmark hull for auto cases, drawn rect for manual ones
};

// Ten panels, half grayscale. Auto cases carry a face whose unpadded hull
// squarifies to exactly 512.
std::vector<PanelCase> master_panels() {
  std::vector<PanelCase> cases;
  const int sizes[10][2] = {{512, 512}, {600, 540}, {640, 800}, {700, 600}, {1024, 768},
                            {530, 900}, {800, 512}, {900, 700}, {612, 612}, {1200, 900}};
  for (int i = 0; i < 10; ++i) {
    const int w = sizes[i][0], h = sizes[i][1];
    PanelCase c;
    c.image = smooth_panel(w, h, i % 2 ? 1 : 3, 100u + static_cast<unsigned>(i));
    c.png = encode_png(c.image);
    c.automatic = i % 3 != 0;
    const double x = (w - 512) * (0.2 + 0.07 * i);
    const double y = (h - 512) * (0.9 - 0.08 * i);
    c.face = c.automatic ? BBox{x + 40.0, y, 432.0, 512.0} : BBox{x, y, 512.0, 512.0};
    cases.push_back(std::move(c));
  }
  return cases;
}

PreparationSettings no_pad() {
  PreparationSettings s;
  s.pad_frac = 0.0;
  return s;
}

RawFace raw_face(const BBox& hull) { return {hull_landmarks(hull), 0.99, 0.0, std::nullopt}; }

PreparedRegion prepare(const PanelCase& c, const std::string& panel_id) {
  if (!c.automatic) return manual_frame(panel_id, c.image.width(), c.image.height(), c.face);
  MockDetector detector(std::vector<RawFace>{raw_face(c.face)});
  const DetectionResult detection = detect_faces(c.image, detector);
  const PreparationResult prepared =
      prepare_regions(detection.faces, panel_id, c.image.width(), c.image.height(), no_pad());
  if (prepared.regions.size() != 1) fail(ErrorCode::kInvalidState, "expected one prepared region");
  return prepared.regions[0];
}

DrivingPerformance one_frame() { return synthetic_performance(1); }

MappedFace map_identity(const PreparedRegion& region, const RasterImage& panel) {
  auto s = create_session("s", region, panel, one_frame(), std::make_shared<IdentityEngine>(), MotionMode::kRelative,
                          SessionOptions{0});
  s->generate({0});
  s->select_keyframe(0);
  return s->commit();
}

// ---- criteria ------------------------------------------------------------

struct Artifacts {
  std::vector<Bytes> composed;
  std::vector<Bytes> mapped;
};

Outcome master_round_trip(const std::vector<PanelCase>& cases, Artifacts* artifacts) {
  Outcome o;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const PanelCase& c = cases[i];
    const std::string id = "panel-" + std::to_string(i + 1);
    const PreparedRegion region = prepare(c, id);
    o.expect(region.crop_spec.side() == kCanonicalSize, id + ": side " + std::to_string(region.crop_spec.side()));
    const std::vector faces{map_identity(region, c.image)};
    const Bytes out = encode_png(compose(c.image, id, faces, 0).image);
    if (artifacts) {
      artifacts->composed.push_back(out);
      artifacts->mapped.push_back(encode_png(faces[0].image));
    }
    o.expect(out == c.png, id + ": composed bytes differ");
  }
  return o;
}

Outcome resampled_round_trip(const std::vector<PanelCase>& cases) {
  Outcome o;
  double worst = 0.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const RasterImage& panel = cases[i].image;
    for (int side : {64, 100, 256, 300}) {
      const PixelSquare sq{static_cast<int>((panel.width() - side) * 0.37),
                           static_cast<int>((panel.height() - side) * 0.61), side};
      const PreparedRegion region = manual_frame("p", panel.width(), panel.height(), sq.to_bbox());
      o.expect(region.crop_spec.square == sq, "manual frame moved the square");
      const std::vector faces{map_identity(region, panel)};
      const RasterImage out = compose(panel, "p", faces, 0).image;
      const int ch = panel.channels();
      std::vector<double> mad(static_cast<std::size_t>(ch), 0.0);
      bool outside_exact = true;
      for (int y = 0; y < panel.height(); ++y) {
        for (int x = 0; x < panel.width(); ++x) {
          const bool inside = x >= sq.x && x < sq.x + side && y >= sq.y && y < sq.y + side;
          for (int c = 0; c < ch; ++c) {
            const int d = std::abs(int(out.at(x, y, c)) - int(panel.at(x, y, c)));
            if (inside) {
              mad[static_cast<std::size_t>(c)] += d;
            } else if (d != 0) {
              outside_exact = false;
            }
          }
        }
      }
      o.expect(outside_exact, "pixels outside the square changed (side " + std::to_string(side) + ")");
      for (double m : mad) {
        const double mean = m / (double(side) * side);
        worst = std::max(worst, mean);
        o.expect(mean <= 2.0, "inside MAD " + std::to_string(mean) + " at side " + std::to_string(side));
      }
    }
  }
  if (o.pass) o.detail = "worst inside MAD " + std::to_string(worst) + "/255";
  return o;
}

Outcome geometry_oracle() {
  Outcome o;
  std::mt19937 rng(20240607);
  std::uniform_real_distribution<double> pos(-200.0, 1400.0), ext(0.5, 700.0), pad(0.0, 1.0);
  std::uniform_int_distribution<int> dim(32, 1600);
  double worst_drift = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::vector<Point2D> points = random_landmarks(rng, pos(rng), pos(rng), ext(rng), ext(rng));
    const LandmarkSet set(points);
    const BBox hull = tight_bbox(set);
    o.expect(hull == brute_force_hull(points), "tight_bbox differs from the brute-force hull");

    const double p = pad(rng);
    const BBox sq = squarify_pad(hull, p);
    const double drift = std::hypot(sq.center_x() - hull.center_x(), sq.center_y() - hull.center_y());
    worst_drift = std::max(worst_drift, drift);
    o.expect(drift <= 0.5, "squarify_pad center drift " + std::to_string(drift));
    o.expect(sq.width == sq.height && sq.width == std::round(std::max(hull.width, hull.height) * (1.0 + 2.0 * p)),
             "squarify_pad side formula");

    const int w = dim(rng), h = dim(rng);
    const PixelSquare c = clamp_square(sq, w, h);
    o.expect(c.side >= 1 && c.x >= 0 && c.y >= 0 && c.x + c.side <= w && c.y + c.side <= h,
             "clamp_square left the panel");
  }
  if (o.pass) o.detail = "max center drift " + std::to_string(worst_drift) + " px";
  return o;
}

struct StampRun {
  int keyframe;
  double eye;
  double lip;
};

std::vector<StampRun> stamp_runs() {
  std::vector<StampRun> runs;
  for (int i : {0, 4, 9})
    for (double eye : {0.0, 0.5, 1.0})
      for (double lip : {0.0, 0.5, 1.0}) runs.push_back({i, eye, lip});
  return runs;
}

const PixelSquare kStampSquare{97, 41, 512};

RasterImage stamp_panel() { return smooth_panel(700, 600, 3, 4242); }

Outcome stamp_routing(Artifacts* artifacts) {
  Outcome o;
  const RasterImage panel = stamp_panel();
  const PreparedRegion region = manual_frame("panel-1", 700, 600, kStampSquare.to_bbox());
  for (const StampRun& run : stamp_runs()) {
    auto s = create_session("s", region, panel, synthetic_performance(10), std::make_shared<StampEngine>(),
                            MotionMode::kRelative, SessionOptions{});
    s->generate({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}).wait();
    s->select_keyframe(run.keyframe);
    if (auto h = s->set_params({run.eye, run.lip})) h->wait();
    const std::vector faces{s->commit()};
    const RasterImage composed = compose(panel, "panel-1", faces, 0).image;
    if (artifacts) {
      artifacts->composed.push_back(encode_png(composed));
      artifacts->mapped.push_back(encode_png(faces[0].image));
    }
    const auto code = decode_stamp(composed, kStampSquare.x, kStampSquare.y);
    const StampCode expected{run.keyframe, static_cast<int>(std::round(run.eye * 255)),
                             static_cast<int>(std::round(run.lip * 255))};
    std::ostringstream what;
    what << "keyframe " << run.keyframe << " eye " << run.eye << " lip " << run.lip;
    o.expect(code.has_value() && *code == expected, what.str() + ": wrong stamp");
  }
  return o;
}

// Small-model check of the session state machine. The reference model is a
// plain value; the real session is forked at every node so prefixes are shared.
struct Model {
  SessionState state = SessionState::kCreated;
  MotionMode mode = MotionMode::kRelative;
  RetargetParams params;
  std::map<int, std::pair<MotionMode, RetargetParams>> results;
  std::optional<int> selected;

  bool fresh(int i) const {
    const auto it = results.find(i);
    return it != results.end() && it->second == std::pair{mode, params};
  }
};

struct Op {
  std::string name;
  std::function<void(MappingSession&)> apply;
  std::function<std::optional<ErrorCode>(Model&)> model;
};

std::optional<ErrorCode> model_generate(Model& m, const std::set<int>& indices) {
  if (m.state == SessionState::kCommitted) return ErrorCode::kSessionCommitted;
  bool any = false;
  for (int i : indices) {
    if (m.fresh(i)) continue;
    m.results[i] = {m.mode, m.params};
    any = true;
  }
  if (any) m.state = SessionState::kBrowsable;
  return std::nullopt;
}

std::optional<ErrorCode> model_select(Model& m, int i) {
  if (m.state == SessionState::kCommitted) return ErrorCode::kSessionCommitted;
  if (!m.results.contains(i)) return ErrorCode::kFrameNotGenerated;
  m.selected = i;
  return std::nullopt;
}

std::optional<ErrorCode> model_params(Model& m, const RetargetParams& p, std::optional<MotionMode> mode) {
  if (m.state == SessionState::kCommitted) return ErrorCode::kSessionCommitted;
  if (m.state != SessionState::kBrowsable) return ErrorCode::kInvalidState;
  const MotionMode next = mode.value_or(m.mode);
  if (p == m.params && next == m.mode) return std::nullopt;
  m.params = p;
  m.mode = next;
  if (m.selected) m.results[*m.selected] = {m.mode, m.params};
  return std::nullopt;
}

std::optional<ErrorCode> model_commit(Model& m) {
  if (m.state == SessionState::kCommitted) return ErrorCode::kSessionCommitted;
  if (!m.selected) return ErrorCode::kNothingSelected;
  if (!m.fresh(*m.selected)) return ErrorCode::kStaleSelection;
  m.state = SessionState::kCommitted;
  return std::nullopt;
}

std::vector<Op> model_ops() {
  const RetargetParams a{0.2, std::nullopt};
  const RetargetParams b{0.7, 0.4};
  return {
      {"gen{0}", [](MappingSession& s) { s.generate({0}); }, [](Model& m) { return model_generate(m, {0}); }},
      {"gen{0,1,2}", [](MappingSession& s) { s.generate({0, 1, 2}); },
       [](Model& m) { return model_generate(m, {0, 1, 2}); }},
      {"select 0", [](MappingSession& s) { s.select_keyframe(0); }, [](Model& m) { return model_select(m, 0); }},
      {"select 2", [](MappingSession& s) { s.select_keyframe(2); }, [](Model& m) { return model_select(m, 2); }},
      {"params A", [a](MappingSession& s) { s.set_params(a); },
       [a](Model& m) { return model_params(m, a, std::nullopt); }},
      {"params B absolute", [b](MappingSession& s) { s.set_params(b, MotionMode::kAbsolute); },
       [b](Model& m) { return model_params(m, b, MotionMode::kAbsolute); }},
      {"commit", [](MappingSession& s) { s.commit(); }, [](Model& m) { return model_commit(m); }},
  };
}

struct ModelChecker {
  std::vector<Op> ops = model_ops();
  long visited = 0;
  Outcome outcome;
  std::string path;

  void check_state(const MappingSession& s, const Model& m) {
    const SessionStatus st = s.status();
    outcome.expect(st.state == m.state, path + ": state " + to_string(st.state) + " expected " + to_string(m.state));
    outcome.expect(st.selected == m.selected, path + ": selection differs");
    outcome.expect(st.params == m.params && st.mode == m.mode, path + ": params differ");
    std::vector<int> expected;
    for (int i = 0; i < 3; ++i)
      if (m.fresh(i)) expected.push_back(i);
    outcome.expect(st.available == expected, path + ": available set differs");
    outcome.expect(st.pending.empty() && st.failures.empty(), path + ": leftover work");
    for (int i = 0; i < 3; ++i) {
      if (m.fresh(i)) {
        const auto f = s.frame(i);
        outcome.expect(decode_stamp(f->image) == stamp_code(i, m.params) && f->mode_used == m.mode,
                       path + ": served frame does not match current params");
      } else {
        bool served = true;
        try {
          s.frame(i);
        } catch (const Error& e) {
          served = e.code() != ErrorCode::kFrameNotGenerated;
        }
        outcome.expect(!served, path + ": stale or missing frame served");
      }
    }
  }

  void explore(const std::shared_ptr<MappingSession>& session, const Model& model, int depth) {
    if (depth == 0 || !outcome.pass) return;
    for (const Op& op : ops) {
      ++visited;
      auto child = session->fork("m");
      Model m = model;
      const std::optional<ErrorCode> want = op.model(m);
      std::optional<ErrorCode> got;
      try {
        op.apply(*child);
      } catch (const Error& e) {
        got = e.code();
      }
      const std::string saved = path;
      path += " > " + op.name;
      outcome.expect(got == want, path + ": error " + (got ? std::string(to_token(*got)) : "none") + " expected " +
                                      (want ? std::string(to_token(*want)) : "none"));
      check_state(*child, m);
      explore(child, m, depth - 1);
      path = saved;
    }
  }
};

Outcome session_model_check() {
  const RasterImage panel = smooth_panel(600, 600, 3, 5);
  const PreparedRegion region = manual_frame("p", 600, 600, {20, 30, 300, 300});
  auto root = create_session("root", region, panel, synthetic_performance(3), std::make_shared<StampEngine>(),
                             MotionMode::kRelative, SessionOptions{0});
  ModelChecker checker;
  checker.check_state(*root, Model{});
  checker.explore(root, Model{}, 6);
  if (checker.outcome.pass) {
    checker.outcome.detail = std::to_string(checker.visited) + " sequence prefixes over " +
                             std::to_string(checker.ops.size()) + " operations";
  }
  return checker.outcome;
}

Outcome mode_equivalence() {
  Outcome o;
  std::mt19937 rng(606);
  std::uniform_int_distribution<int> dim(64, 1500);
  for (int i = 0; i < 200; ++i) {
    const int w = dim(rng), h = dim(rng);
    const int side = std::uniform_int_distribution<int>(32, std::min(w, h))(rng);
    const PixelSquare sq{std::uniform_int_distribution<int>(0, w - side)(rng),
                         std::uniform_int_distribution<int>(0, h - side)(rng), side};
    const PreparedRegion manual = manual_frame("p", w, h, sq.to_bbox());
    const DetectedFace face{LandmarkSet(hull_landmarks(sq.to_bbox())), 0.9, std::nullopt, std::nullopt};
    const PreparationResult automatic = prepare_regions(std::vector{face}, "p", w, h, no_pad());
    if (automatic.regions.size() != 1) {
      o.expect(false, "auto path produced no region");
      continue;
    }
    CropSpec a = automatic.regions[0].crop_spec;
    o.expect(a.source == CropSource::kAuto && manual.crop_spec.source == CropSource::kManual, "source fields");
    a.source = CropSource::kManual;
    o.expect(a == manual.crop_spec, "crop specs differ beyond source");
  }
  return o;
}

Outcome persistence() {
  Outcome o;
  const Project project = sample_project();
  o.expect(project.panels.size() == 2 && project.regions.size() == 3 && project.mapped.size() == 2 &&
               project.compositions.size() == 1,
           "sample project shape");
  TempDir dir;
  save(project, dir.path());
  const Project loaded = load(dir.path());
  o.expect(loaded == project, "loaded project differs");
  for (const auto& [hash, bytes] : project.assets) {
    o.expect(read_file(dir / asset_path(hash)) == bytes, "asset bytes differ on disk");
  }
  const std::string victim = project.compositions[0].asset;
  Bytes bytes = read_file(dir / asset_path(victim));
  bytes[bytes.size() / 3] ^= 0x40;
  write_file(dir / asset_path(victim), bytes);
  bool detected = false;
  try {
    load(dir.path());
  } catch (const Error& e) {
    detected = e.code() == ErrorCode::kIntegrityError && std::string(e.what()).find(victim) != std::string::npos;
  }
  o.expect(detected, "tampered asset not detected");
  return o;
}

Json frames_payload(int n) {
  Json frames = Json::array();
  for (const RasterImage& f : synthetic_performance(n).frames) frames.push_back(base64_encode(encode_png(f)));
  return frames;
}

std::string detector_document(const BBox& hull) {
  Json points = Json::array();
  for (const Point2D& p : hull_landmarks(hull)) points.push_back({p.x, p.y});
  return Json::array({{{"landmarks", points}, {"confidence", 0.99}, {"yaw", 0.0}}}).dump();
}

ServiceConfig inline_config() {
  ServiceConfig config;
  config.session_options.workers = 0;
  return config;
}

Outcome service_parity(const std::vector<PanelCase>& cases, const Artifacts& master, const Artifacts& stamped) {
  Outcome o;
  TempDir dir;
  {
    Service service(inline_config());
    Json settings;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const PanelCase& c = cases[i];
      const std::string id = service.create_panel(c.png)["panel_id"];
      o.expect(id == "panel-" + std::to_string(i + 1), "unexpected panel id " + id);
      if (c.automatic) {
        const auto doc = dir / ("faces" + std::to_string(i) + ".json");
        const std::string text = detector_document(c.face);
        write_file(doc, Bytes(text.begin(), text.end()));
        service.auto_detect(id, {{"detector", "mock:" + doc.string()}, {"pad_frac", 0.0}});
      } else {
        service.manual_region(id, {{"rect", {c.face.x, c.face.y, c.face.width, c.face.height}}});
      }
      const std::string sid =
          service.create_mapping({{"panel_id", id}, {"face_index", 0}, {"frames", frames_payload(1)}})["session_id"];
      service.request_frames(sid, {{"indices", {0}}});
      service.wait_session(sid);
      service.select_keyframe(sid, {{"index", 0}});
      const std::string mapped = service.commit_session(sid)["mapped_id"];
      o.expect(service.export_asset(mapped) == master.mapped[i], id + ": service mapped face differs");
      const std::string composed = service.compose_panel(id, {{"mapped_face_ids", {mapped}}})["composed_id"];
      o.expect(service.export_asset(composed) == master.composed[i], id + ": service master round trip differs");
    }
  }
  {
    Service service(inline_config());
    service.create_panel(encode_png(stamp_panel()));
    service.manual_region("panel-1", {{"rect", {kStampSquare.x, kStampSquare.y, 512, 512}}});
    const auto runs = stamp_runs();
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const std::string sid = service.create_mapping(
          {{"panel_id", "panel-1"}, {"face_index", 0}, {"engine", "stamp"}, {"frames", frames_payload(10)}})["session_id"];
      service.request_frames(sid, {{"indices", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}}});
      service.wait_session(sid);
      service.select_keyframe(sid, {{"index", runs[r].keyframe}});
      service.set_session_params(sid, {{"eye", runs[r].eye}, {"lip", runs[r].lip}});
      service.wait_session(sid);
      const std::string mapped = service.commit_session(sid)["mapped_id"];
      o.expect(service.export_asset(mapped) == stamped.mapped[r], "service stamp face " + std::to_string(r) + " differs");
      const std::string composed = service.compose_panel("panel-1", {{"mapped_face_ids", {mapped}}})["composed_id"];
      o.expect(service.export_asset(composed) == stamped.composed[r], "service stamp run " + std::to_string(r) + " differs");
    }
  }
  return o;
}

Outcome warning_gates() {
  Outcome o;
  const RasterImage panel(640, 480, 3, 255);
  MockDetector posed(fixture("yaw46.json"));
  const PreparationResult a = prepare_regions(detect_faces(panel, posed).faces, "p", 640, 480);
  o.expect(a.regions.size() == 1 && a.failures.empty(), "yaw 46 face did not become one region");
  if (a.regions.size() == 1) {
    o.expect(a.regions[0].warnings == std::vector{FaceWarning::kExtremePose}, "yaw 46 warnings are not {extreme_pose}");
  }
  MockDetector tiny(fixture("tiny_face.json"));
  const PreparationResult b = prepare_regions(detect_faces(panel, tiny).faces, "p", 640, 480);
  o.expect(b.regions.empty() && b.failures.size() == 1 && b.failures[0].reason == ErrorCode::kSideTooSmall,
           "8 px face did not fail preparation");
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const char* name, double limit_s, const std::function<Outcome()>& body) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (limit_s > 0 && secs >= limit_s) {
      o.detail = "took " + std::to_string(secs) + " s, limit " + std::to_string(limit_s) + " s" +
                 (o.detail.empty() ? "" : "; " + o.detail);
      o.pass = false;
    }
    if (!o.pass) ++failures;
    std::printf("criterion %d %-28s %s  %.2fs%s%s\n", n, name, o.pass ? "PASS" : "FAIL", secs,
                o.detail.empty() ? "" : "  ", o.detail.c_str());
    std::fflush(stdout);
  };

  const std::vector<PanelCase> cases = master_panels();
  Artifacts master, stamped;
  report(1, "master-round-trip", 10, [&] { return master_round_trip(cases, &master); });
  report(2, "resampled-round-trip", 20, [&] { return resampled_round_trip(cases); });
  report(3, "geometry-oracle", 5, [] { return geometry_oracle(); });
  report(4, "stamp-routing", 30, [&] { return stamp_routing(&stamped); });
  report(5, "session-model-check", 10, [] { return session_model_check(); });
  report(6, "mode-equivalence", 0, [] { return mode_equivalence(); });
  report(7, "project-persistence", 5, [] { return persistence(); });
  report(8, "service-parity", 0, [&] {
    if (master.composed.size() != cases.size() || stamped.composed.size() != stamp_runs().size()) {
      return Outcome{false, "direct-library artifacts missing"};
    }
    return service_parity(cases, master, stamped);
  });
  report(9, "warning-gates", 0, [] { return warning_gates(); });
  return failures == 0 ? 0 : 1;
}
