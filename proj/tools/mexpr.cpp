// Headless driver: detect, map, compose, roundtrip, serve.
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "mexpr/codec.hpp"
#include "mexpr/composition.hpp"
#include "mexpr/error.hpp"
#include "mexpr/face_preparation.hpp"
#include "mexpr/json_io.hpp"
#include "mexpr/media.hpp"
#include "mexpr/reenactment.hpp"
#include "mexpr/service.hpp"
#include "mexpr/session.hpp"

namespace fs = std::filesystem;
using namespace mexpr;

namespace {

// Exit codes, one per error family.
enum Exit : int {
  kOk = 0,
  kOther = 1,
  kUsage = 2,
  kMedia = 3,
  kGeometry = 4,
  kAdapter = 5,
  kSession = 6,
  kStore = 7,
};

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnreadableMedia:
    case ErrorCode::kZeroFrames:
    case ErrorCode::kEmptyPerformance:
      return kMedia;
    case ErrorCode::kDegenerateLandmarks:
    case ErrorCode::kPanelTooSmall:
    case ErrorCode::kSideTooSmall:
    case ErrorCode::kSpecOutOfBounds:
    case ErrorCode::kMismatchedPanel:
      return kGeometry;
    case ErrorCode::kAdapterUnavailable:
    case ErrorCode::kAdapterProtocolError:
    case ErrorCode::kEngineFailure:
    case ErrorCode::kEngineUnknown:
    case ErrorCode::kInvalidSource:
      return kAdapter;
    case ErrorCode::kInvalidIndex:
    case ErrorCode::kFrameNotGenerated:
    case ErrorCode::kParamOutOfRange:
    case ErrorCode::kNothingSelected:
    case ErrorCode::kStaleSelection:
    case ErrorCode::kSessionCommitted:
    case ErrorCode::kInvalidState:
      return kSession;
    case ErrorCode::kIOFailure:
    case ErrorCode::kIntegrityError:
    case ErrorCode::kMissingManifest:
    case ErrorCode::kVersionUnsupported:
    case ErrorCode::kNotFound:
      return kStore;
    case ErrorCode::kInvalidArgument:
      return kUsage;
  }
  return kOther;
}

std::string panel_id_for(const fs::path& panel) { return panel.stem().string(); }

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, Bytes(text.begin(), text.end()));
}

Json read_json(const fs::path& path) {
  const Bytes bytes = read_file(path);
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::exception& e) {
    fail(ErrorCode::kInvalidArgument, path.string() + ": " + e.what());
  }
}

struct Common {
  std::string panel;
  std::string detector;
  double pad = kDefaultPadFrac;
  std::string out;
};

PreparationSettings settings_from(const Common& c) {
  PreparationSettings s;
  s.pad_frac = c.pad;
  return s;
}

PreparationResult detect_regions(const RasterImage& panel, const Common& c, Json* diagnostics) {
  auto detector = make_detector(c.detector);
  const DetectionResult detection = detect_faces(panel, *detector);
  if (diagnostics) *diagnostics = detection.diagnostics;
  return prepare_regions(detection.faces, panel_id_for(c.panel), panel.width(), panel.height(),
                         settings_from(c));
}

int cmd_detect(const Common& c) {
  const RasterImage panel = read_png(c.panel);
  Json diagnostics = Json::array();
  const PreparationResult result = detect_regions(panel, c, &diagnostics);
  const Json doc{{"panel_id", panel_id_for(c.panel)},
                 {"width", panel.width()},
                 {"height", panel.height()},
                 {"regions", result.regions},
                 {"failures", result.failures},
                 {"diagnostics", diagnostics}};
  if (c.out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    write_text(c.out, doc.dump(2) + "\n");
  }
  return kOk;
}

struct MapOptions {
  std::optional<int> region;
  std::string rect;
  std::string frames_dir;
  std::string engine = "identity";
  std::vector<std::string> externals;
  std::string mode = "relative";
  std::optional<double> eye;
  std::optional<double> lip;
  int keyframe = 0;
};

int cmd_map(const Common& c, const MapOptions& m) {
  const RasterImage panel = read_png(c.panel);
  const std::string panel_id = panel_id_for(c.panel);
  PreparedRegion region;
  if (!m.rect.empty()) {
    region = manual_frame(panel_id, panel.width(), panel.height(), parse_rect(m.rect), settings_from(c));
  } else {
    if (c.detector.empty()) fail(ErrorCode::kInvalidArgument, "map needs --rect or --detector with --region");
    const PreparationResult result = detect_regions(panel, c, nullptr);
    const int index = m.region.value_or(0);
    if (index < 0 || index >= static_cast<int>(result.regions.size())) {
      fail(ErrorCode::kNotFound, "region " + std::to_string(index) + " not found; " +
                                     std::to_string(result.regions.size()) + " region(s) detected");
    }
    region = result.regions[static_cast<std::size_t>(index)];
  }

  EngineRegistry registry;
  for (const auto& e : m.externals) registry.add_external(e);
  auto engine = registry.find(m.engine);
  DrivingPerformance performance =
      m.frames_dir.empty() ? DrivingPerformance{{RasterImage(1, 1, 3, 0)}, std::nullopt, "still"}
                           : ingest_performance(m.frames_dir, 1);
  auto session = create_session("cli", region, panel, std::move(performance), engine,
                                motion_mode_from_string(m.mode));
  session->generate({m.keyframe}).wait();
  const auto status = session->status();
  if (status.failures.contains(m.keyframe)) {
    fail(ErrorCode::kEngineFailure, status.failures.at(m.keyframe));
  }
  session->select_keyframe(m.keyframe);
  // Tuning regenerates the selected keyframe.
  if (auto h = session->set_params({m.eye, m.lip})) {
    h->wait();
    if (!h->failures().empty()) fail(ErrorCode::kEngineFailure, h->failures().begin()->second);
  }
  const MappedFace face = session->commit();

  const fs::path out = c.out.empty() ? fs::path("mapped.png") : fs::path(c.out);
  write_png(out, face.image);
  const Json sidecar{{"image", out.filename().string()},
                     {"crop_spec", face.crop_spec},
                     {"provenance", face.provenance},
                     {"warnings", Json(region).at("warnings")}};
  write_text(out.string() + ".json", sidecar.dump(2) + "\n");
  return kOk;
}

MappedFace load_mapped(const fs::path& sidecar_path) {
  const Json doc = read_json(sidecar_path);
  try {
    MappedFace face;
    face.crop_spec = doc.at("crop_spec").get<CropSpec>();
    face.provenance = doc.at("provenance").get<Provenance>();
    face.image = read_png(sidecar_path.parent_path() / doc.at("image").get<std::string>());
    return face;
  } catch (const Json::exception& e) {
    fail(ErrorCode::kInvalidArgument, sidecar_path.string() + ": " + e.what());
  }
}

int cmd_compose(const Common& c, const std::vector<std::string>& sidecars, int feather, bool seam_report) {
  const RasterImage panel = read_png(c.panel);
  std::vector<MappedFace> faces;
  for (const auto& s : sidecars) faces.push_back(load_mapped(s));
  const ComposedPanel composed = compose(panel, panel_id_for(c.panel), faces, feather);
  write_png(c.out.empty() ? fs::path("composed.png") : fs::path(c.out), composed.image);
  for (const auto& w : composed.overlaps) {
    std::cerr << "warning: face " << w.later << " overlaps face " << w.earlier << "\n";
  }
  if (seam_report) std::cout << Json(composed.seams).dump(2) << "\n";
  return kOk;
}

// Frames a 512 square (or --rect), maps it with the identity engine and
// pastes it back; the result must reproduce the input file byte for byte.
int cmd_roundtrip(const Common& c, const std::string& rect) {
  const Bytes original = read_file(c.panel);
  const RasterImage panel = decode_png(original);
  const std::string panel_id = panel_id_for(c.panel);
  BBox frame = rect.empty() ? BBox{(panel.width() - kCanonicalSize) / 2.0,
                                   (panel.height() - kCanonicalSize) / 2.0, double(kCanonicalSize),
                                   double(kCanonicalSize)}
                            : parse_rect(rect);
  const PreparedRegion region = manual_frame(panel_id, panel.width(), panel.height(), frame);
  if (region.crop_spec.side() != kCanonicalSize) {
    fail(ErrorCode::kSideTooSmall, "panel cannot host a 512 px region (best side " +
                                       std::to_string(region.crop_spec.side()) + ")");
  }
  auto session = create_session("roundtrip", region, panel,
                                DrivingPerformance{{RasterImage(1, 1, 3, 0)}, std::nullopt, "still"},
                                std::make_shared<IdentityEngine>(), MotionMode::kRelative, SessionOptions{0});
  session->generate({0});
  session->select_keyframe(0);
  const std::vector<MappedFace> faces{session->commit()};
  const Bytes result = encode_png(compose(panel, panel_id, faces).image);
  if (!c.out.empty()) write_file(c.out, result);
  if (result != original) {
    std::cerr << "roundtrip: composed bytes differ from " << c.panel << "\n";
    return kOther;
  }
  std::cout << "roundtrip ok: " << original.size() << " bytes identical, square "
            << Json(region.crop_spec.square).dump() << "\n";
  return kOk;
}

HttpServer* g_server = nullptr;

int cmd_serve(const std::string& bind, const std::string& project_dir, const std::vector<std::string>& engines,
              const std::string& detector) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) fail(ErrorCode::kInvalidArgument, "--bind expects host:port");
  const std::string host = bind.substr(0, colon);
  const int port = std::stoi(bind.substr(colon + 1));
  Service service(ServiceConfig{project_dir, engines, detector, {}});
  HttpServer server(service);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  std::cerr << "serving on " << bind << "\n";
  server.run(host, port);
  g_server = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manga panel expression mapping pipeline"};
  app.require_subcommand(1);

  Common common;
  MapOptions map;
  std::vector<std::string> sidecars;
  int feather = 0;
  bool seam_report = false;
  std::string bind = "127.0.0.1:8080";
  std::string project_dir;
  std::vector<std::string> serve_engines;

  auto add_panel = [&](CLI::App* sub) {
    sub->add_option("--panel", common.panel, "Panel PNG")->required()->check(CLI::ExistingFile);
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", common.out, "Output path"); };
  auto add_pad = [&](CLI::App* sub) {
    sub->add_option("--pad", common.pad, "Padding fraction around the landmark hull")->check(CLI::Range(0.0, 1.0));
  };

  auto* detect = app.add_subcommand("detect", "Detect faces and write the regions document");
  add_panel(detect);
  detect->add_option("--detector", common.detector, "mock:<fixture> or external:<command>")->required();
  add_pad(detect);
  add_out(detect);

  auto* mapcmd = app.add_subcommand("map", "Reenact one region at a keyframe and write the mapped face");
  add_panel(mapcmd);
  mapcmd->add_option("--detector", common.detector, "Detector used with --region");
  mapcmd->add_option("--region", map.region, "Index into the detected regions");
  mapcmd->add_option("--rect", map.rect, "Manual frame x,y,w,h");
  add_pad(mapcmd);
  mapcmd->add_option("--frames-dir", map.frames_dir, "Driving frames (PNG directory or video)");
  mapcmd->add_option("--engine", map.engine, "identity, stamp or external:<label>");
  mapcmd->add_option("--external", map.externals, "External engine label=command");
  mapcmd->add_option("--mode", map.mode, "relative or absolute")->check(CLI::IsMember({"relative", "absolute"}));
  mapcmd->add_option("--eye", map.eye, "Eye openness in [0,1]");
  mapcmd->add_option("--lip", map.lip, "Lip openness in [0,1]");
  mapcmd->add_option("--keyframe", map.keyframe, "Driving frame index");
  add_out(mapcmd);

  auto* composecmd = app.add_subcommand("compose", "Paste mapped faces back into the panel");
  add_panel(composecmd);
  composecmd->add_option("mapped", sidecars, "Mapped-face documents written by map")->check(CLI::ExistingFile);
  composecmd->add_option("--feather", feather, "Feather width in pixels")->check(CLI::NonNegativeNumber);
  composecmd->add_flag("--seam-report", seam_report, "Print the seam metrics document");
  add_out(composecmd);

  auto* roundtrip = app.add_subcommand("roundtrip", "Identity map at 512 and byte-compare");
  add_panel(roundtrip);
  std::string roundtrip_rect;
  roundtrip->add_option("--rect", roundtrip_rect, "Frame to use instead of the centered square");
  add_out(roundtrip);

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--bind", bind, "host:port");
  serve->add_option("--project-dir", project_dir, "Project directory");
  serve->add_option("--engine", serve_engines, "External engine label=command");
  serve->add_option("--detector", common.detector, "Default detector spec");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*detect) return cmd_detect(common);
    if (*mapcmd) return cmd_map(common, map);
    if (*composecmd) return cmd_compose(common, sidecars, feather, seam_report);
    if (*roundtrip) return cmd_roundtrip(common, roundtrip_rect);
    if (*serve) return cmd_serve(bind, project_dir, serve_engines, common.detector);
  } catch (const Error& e) {
    std::cerr << "error: " << e.token() << ": " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kUsage;
}
