#include "mexpr/service.hpp"

#include <algorithm>

#include "mexpr/composition.hpp"
#include "mexpr/error.hpp"
#include "mexpr/face_preparation.hpp"
#include "mexpr/media.hpp"

namespace mexpr {

namespace {

int id_number(const std::string& id, const std::string& prefix) {
  if (id.rfind(prefix, 0) != 0) return 0;
  try {
    return std::stoi(id.substr(prefix.size()));
  } catch (const std::exception&) {
    return 0;
  }
}

template <typename T>
T field(const Json& request, const char* key) {
  if (!request.is_object() || !request.contains(key)) {
    fail(ErrorCode::kInvalidArgument, std::string("request is missing '") + key + "'");
  }
  try {
    return request[key].get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("field '") + key + "': " + e.what());
  }
}

RetargetParams params_from(const Json& request) {
  RetargetParams params;
  auto read = [&](const char* key) -> std::optional<double> {
    if (!request.contains(key) || request[key].is_null()) return std::nullopt;
    if (!request[key].is_number()) fail(ErrorCode::kInvalidArgument, std::string(key) + " must be a number");
    return request[key].get<double>();
  };
  params.eye_openness = read("eye");
  params.lip_openness = read("lip");
  return params;
}

}  // namespace

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  for (const auto& e : config_.external_engines) engines_.add_external(e);
  if (!config_.project_dir.empty() && std::filesystem::exists(config_.project_dir / "manifest.json")) {
    project_ = load(config_.project_dir);
    for (const auto& p : project_.panels) panel_counter_ = std::max(panel_counter_, id_number(p.panel_id, "panel-"));
    for (const auto& m : project_.mapped) mapped_counter_ = std::max(mapped_counter_, id_number(m.mapped_id, "mapped-"));
    for (const auto& c : project_.compositions) {
      composed_counter_ = std::max(composed_counter_, id_number(c.composition_id, "composed-"));
    }
  }
}

void Service::persist_locked() {
  if (!config_.project_dir.empty()) save(project_, config_.project_dir);
}

const RasterImage& Service::panel_image_locked(const std::string& panel_id) {
  if (auto it = panel_cache_.find(panel_id); it != panel_cache_.end()) return it->second;
  const PanelRecord* record = project_.find_panel(panel_id);
  if (record == nullptr) fail(ErrorCode::kNotFound, "no panel '" + panel_id + "'");
  return panel_cache_.emplace(panel_id, decode_png(project_.asset(record->asset))).first->second;
}

int Service::next_face_index_locked(const std::string& panel_id) const {
  int next = 0;
  for (const auto& r : project_.regions) {
    if (r.crop_spec.panel_id == panel_id) next = std::max(next, r.face_index + 1);
  }
  return next;
}

Json Service::create_panel(const Bytes& png) {
  RasterImage image = decode_png(png);
  std::lock_guard lock(mutex_);
  const std::string panel_id = "panel-" + std::to_string(++panel_counter_);
  const std::string hash = project_.add_asset(png);
  project_.panels.push_back({panel_id, hash, image.width(), image.height(), image.channels()});
  panel_cache_.emplace(panel_id, std::move(image));
  persist_locked();
  const PanelRecord& p = project_.panels.back();
  return {{"panel_id", panel_id}, {"width", p.width}, {"height", p.height}, {"channels", p.channels}};
}

Json Service::auto_detect(const std::string& panel_id, const Json& request) {
  RasterImage panel;
  PreparationSettings settings;
  {
    std::lock_guard lock(mutex_);
    panel = panel_image_locked(panel_id);
    settings = project_.settings;
  }
  const std::string spec = request.is_object() && request.contains("detector")
                               ? field<std::string>(request, "detector")
                               : config_.detector;
  if (spec.empty()) fail(ErrorCode::kAdapterUnavailable, "no detector configured");
  if (request.is_object() && request.contains("pad_frac")) settings.pad_frac = field<double>(request, "pad_frac");

  auto detector = make_detector(spec);
  DetectionResult detection = detect_faces(panel, *detector);

  std::lock_guard lock(mutex_);
  std::erase_if(project_.regions, [&](const PreparedRegion& r) {
    return r.crop_spec.panel_id == panel_id && r.origin == CropSource::kAuto;
  });
  PreparationResult prepared = prepare_regions(detection.faces, panel_id, panel.width(), panel.height(),
                                               settings, next_face_index_locked(panel_id));
  for (const auto& r : prepared.regions) project_.regions.push_back(r);
  persist_locked();
  return {{"regions", prepared.regions}, {"failures", prepared.failures}, {"diagnostics", detection.diagnostics}};
}

Json Service::manual_region(const std::string& panel_id, const Json& request) {
  BBox rect;
  if (!request.is_object() || !request.contains("rect")) fail(ErrorCode::kInvalidArgument, "request is missing 'rect'");
  const Json& r = request["rect"];
  if (r.is_string()) {
    rect = parse_rect(r.get<std::string>());
  } else if (r.is_array() && r.size() == 4 && std::all_of(r.begin(), r.end(), [](const Json& v) { return v.is_number(); })) {
    rect = {r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()};
  } else {
    fail(ErrorCode::kInvalidArgument, "rect must be [x, y, w, h]");
  }
  std::lock_guard lock(mutex_);
  const RasterImage& panel = panel_image_locked(panel_id);
  PreparedRegion region = manual_frame(panel_id, panel.width(), panel.height(), rect, project_.settings,
                                       next_face_index_locked(panel_id));
  project_.regions.push_back(region);
  persist_locked();
  return region;
}

Json Service::create_mapping(const Json& request) {
  const auto panel_id = field<std::string>(request, "panel_id");
  const int face_index = field<int>(request, "face_index");
  const std::string engine_name = request.contains("engine") ? field<std::string>(request, "engine") : "identity";
  const MotionMode mode = request.contains("mode") ? motion_mode_from_string(field<std::string>(request, "mode"))
                                                   : MotionMode::kRelative;
  auto engine = engines_.find(engine_name);

  DrivingPerformance performance;
  if (request.contains("frames")) {
    for (const Json& f : request["frames"]) performance.frames.push_back(decode_png(base64_decode(f.get<std::string>())));
    performance.source_label = "upload";
    validate(performance);
  } else if (request.contains("frames_dir")) {
    std::optional<int> keep;
    if (request.contains("keep_every")) keep = field<int>(request, "keep_every");
    performance = ingest_performance(field<std::string>(request, "frames_dir"), keep);
  } else {
    fail(ErrorCode::kEmptyPerformance, "no driving performance supplied");
  }

  std::lock_guard lock(mutex_);
  const RasterImage& panel = panel_image_locked(panel_id);
  const PreparedRegion* region = project_.find_region(panel_id, face_index);
  if (region == nullptr) {
    fail(ErrorCode::kNotFound, "no region " + std::to_string(face_index) + " on panel '" + panel_id + "'");
  }
  const std::string session_id = "session-" + std::to_string(++session_counter_);
  auto s = create_session(session_id, *region, panel, std::move(performance), engine, mode,
                          config_.session_options);
  sessions_.emplace(session_id, s);
  return {{"session_id", session_id}, {"frame_count", s->frame_count()}};
}

std::shared_ptr<MappingSession> Service::session(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) fail(ErrorCode::kNotFound, "no session '" + session_id + "'");
  return it->second;
}

Json Service::request_frames(const std::string& session_id, const Json& request) {
  const auto indices = field<std::vector<int>>(request, "indices");
  auto handle = session(session_id)->generate(std::set<int>(indices.begin(), indices.end()));
  return {{"accepted", true}, {"scheduled", handle.requested()}};
}

Json Service::get_status(const std::string& session_id) const {
  auto s = session(session_id);
  Json status = s->status();
  status["session_id"] = session_id;
  status["engine"] = s->engine().name;
  return status;
}

Bytes Service::get_frame(const std::string& session_id, int index) const {
  return encode_png(session(session_id)->frame(index)->image);
}

Json Service::set_session_params(const std::string& session_id, const Json& request) {
  auto s = session(session_id);
  std::optional<MotionMode> mode;
  if (request.contains("mode") && !request["mode"].is_null()) {
    mode = motion_mode_from_string(field<std::string>(request, "mode"));
  }
  s->set_params(params_from(request), mode);
  return get_status(session_id);
}

Json Service::select_keyframe(const std::string& session_id, const Json& request) {
  session(session_id)->select_keyframe(field<int>(request, "index"));
  return get_status(session_id);
}

Json Service::commit_session(const std::string& session_id) {
  MappedFace face = session(session_id)->commit();
  Bytes png = encode_png(face.image);
  std::lock_guard lock(mutex_);
  const std::string mapped_id = "mapped-" + std::to_string(++mapped_counter_);
  const std::string hash = project_.add_asset(std::move(png));
  project_.mapped.push_back({mapped_id, face.crop_spec, face.provenance, hash});
  persist_locked();
  return {{"mapped_id", mapped_id}, {"crop_spec", face.crop_spec}, {"provenance", face.provenance}, {"asset", hash}};
}

Json Service::compose_panel(const std::string& panel_id, const Json& request) {
  const auto ids = field<std::vector<std::string>>(request, "mapped_face_ids");
  const int feather = request.contains("feather_width") ? field<int>(request, "feather_width") : 0;
  std::lock_guard lock(mutex_);
  const RasterImage& panel = panel_image_locked(panel_id);
  std::vector<MappedFace> faces;
  for (const auto& id : ids) {
    const MappedRecord* m = project_.find_mapped(id);
    if (m == nullptr) fail(ErrorCode::kNotFound, "no mapped face '" + id + "'");
    faces.push_back({m->crop_spec, decode_png(project_.asset(m->asset)), m->provenance});
  }
  ComposedPanel composed = compose(panel, panel_id, faces, feather);
  const std::string composed_id = "composed-" + std::to_string(++composed_counter_);
  const std::string hash = project_.add_asset(encode_png(composed.image));
  project_.compositions.push_back({composed_id, panel_id, hash, feather, ids, composed.seams});
  persist_locked();
  return {{"composed_id", composed_id},
          {"asset", hash},
          {"seams", composed.seams},
          {"overlap_warnings", composed.overlaps}};
}

Bytes Service::export_asset(const std::string& id) const {
  std::lock_guard lock(mutex_);
  if (const PanelRecord* p = project_.find_panel(id)) return project_.asset(p->asset);
  if (const CompositionRecord* c = project_.find_composition(id)) return project_.asset(c->asset);
  if (const MappedRecord* m = project_.find_mapped(id)) return project_.asset(m->asset);
  fail(ErrorCode::kNotFound, "no panel, mapped face or composition '" + id + "'");
}

Json Service::list_engines() const {
  const EngineListing listing = engines_.list_engines();
  return {{"engines", listing.engines}, {"diagnostics", listing.diagnostics}};
}

void Service::wait_session(const std::string& session_id) const { session(session_id)->wait_idle(); }

Project Service::project() const {
  std::lock_guard lock(mutex_);
  return project_;
}

Json api_error(const Error& error) {
  return {{"code", std::string(error.token())}, {"message", error.what()}, {"retryable", error.retryable()}};
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kFrameNotGenerated:
    case ErrorCode::kNothingSelected:
    case ErrorCode::kStaleSelection:
    case ErrorCode::kSessionCommitted:
    case ErrorCode::kInvalidState: return 409;
    case ErrorCode::kUnreadableMedia: return 415;
    case ErrorCode::kAdapterUnavailable:
    case ErrorCode::kEngineFailure: return 503;
    case ErrorCode::kAdapterProtocolError: return 502;
    case ErrorCode::kIOFailure:
    case ErrorCode::kIntegrityError:
    case ErrorCode::kMissingManifest:
    case ErrorCode::kVersionUnsupported: return 500;
    default: return 400;
  }
}

}  // namespace mexpr
