#include "mexpr/project_store.hpp"

#include <set>

#include "mexpr/error.hpp"
#include "mexpr/json_io.hpp"

namespace mexpr {

namespace fs = std::filesystem;

std::string Project::add_asset(Bytes bytes) {
  std::string hash = sha256_hex(bytes);
  assets.try_emplace(hash, std::move(bytes));
  return hash;
}

const Bytes& Project::asset(const std::string& hash) const {
  const auto it = assets.find(hash);
  if (it == assets.end()) fail(ErrorCode::kNotFound, "no asset " + hash);
  return it->second;
}

const PanelRecord* Project::find_panel(const std::string& panel_id) const {
  for (const auto& p : panels) {
    if (p.panel_id == panel_id) return &p;
  }
  return nullptr;
}

const PreparedRegion* Project::find_region(const std::string& panel_id, int face_index) const {
  for (const auto& r : regions) {
    if (r.crop_spec.panel_id == panel_id && r.face_index == face_index) return &r;
  }
  return nullptr;
}

const MappedRecord* Project::find_mapped(const std::string& mapped_id) const {
  for (const auto& m : mapped) {
    if (m.mapped_id == mapped_id) return &m;
  }
  return nullptr;
}

const CompositionRecord* Project::find_composition(const std::string& composition_id) const {
  for (const auto& c : compositions) {
    if (c.composition_id == composition_id) return &c;
  }
  return nullptr;
}

std::string asset_path(const std::string& hash) { return "assets/" + hash + ".png"; }

std::string manifest_text(const Project& project) {
  Json panels = Json::array();
  for (const auto& p : project.panels) {
    panels.push_back({{"panel_id", p.panel_id},
                      {"asset", asset_path(p.asset)},
                      {"width", p.width},
                      {"height", p.height},
                      {"channels", p.channels}});
  }
  Json mapped = Json::array();
  for (const auto& m : project.mapped) {
    mapped.push_back({{"mapped_id", m.mapped_id},
                      {"crop_spec", m.crop_spec},
                      {"provenance", m.provenance},
                      {"asset", asset_path(m.asset)}});
  }
  Json compositions = Json::array();
  for (const auto& c : project.compositions) {
    compositions.push_back({{"composition_id", c.composition_id},
                            {"panel_id", c.panel_id},
                            {"asset", asset_path(c.asset)},
                            {"feather_width", c.feather_width},
                            {"mapped_ids", c.mapped_ids},
                            {"seams", c.seams}});
  }
  Json assets = Json::array();
  for (const auto& [hash, bytes] : project.assets) {
    assets.push_back({{"sha256", hash}, {"path", asset_path(hash)}, {"size", bytes.size()}});
  }
  const Json manifest{{"schema_version", kSchemaVersion},
                      {"project_id", project.project_id},
                      {"settings", project.settings},
                      {"panels", panels},
                      {"regions", project.regions},
                      {"mapped", mapped},
                      {"compositions", compositions},
                      {"assets", assets}};
  return manifest.dump(2) + "\n";
}

namespace {

void write_atomically(const fs::path& target, std::span<const std::uint8_t> bytes) {
  fs::path tmp = target;
  tmp += ".tmp";
  write_file(tmp, bytes);
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) fail(ErrorCode::kIOFailure, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string hash_from_path(const std::string& path) {
  const std::string prefix = "assets/";
  const std::string suffix = ".png";
  if (path.size() <= prefix.size() + suffix.size() || path.rfind(prefix, 0) != 0 ||
      path.substr(path.size() - suffix.size()) != suffix) {
    fail(ErrorCode::kIntegrityError, "malformed asset path '" + path + "'");
  }
  return path.substr(prefix.size(), path.size() - prefix.size() - suffix.size());
}

}  // namespace

std::string save(const Project& project, const fs::path& directory) {
  std::error_code ec;
  fs::create_directories(directory / "assets", ec);
  if (ec) fail(ErrorCode::kIOFailure, "cannot create " + directory.string() + ": " + ec.message());
  for (const auto& [hash, bytes] : project.assets) {
    const fs::path target = directory / asset_path(hash);
    if (fs::exists(target, ec)) {
      try {
        if (sha256_hex(read_file(target)) == hash) continue;
      } catch (const Error&) {
      }
    }
    write_atomically(target, bytes);
  }
  const std::string text = manifest_text(project);
  write_atomically(directory / "manifest.json",
                   std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  return text;
}

Project load(const fs::path& directory) {
  const fs::path manifest_path = directory / "manifest.json";
  std::error_code ec;
  if (!fs::is_regular_file(manifest_path, ec)) {
    fail(ErrorCode::kMissingManifest, "no manifest.json in " + directory.string());
  }
  const Bytes raw = read_file(manifest_path);
  Json doc;
  try {
    doc = Json::parse(raw.begin(), raw.end());
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kIntegrityError, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer()) {
    fail(ErrorCode::kIntegrityError, "manifest has no schema_version");
  }
  const int version = doc["schema_version"].get<int>();
  if (version != kSchemaVersion) {
    fail(ErrorCode::kVersionUnsupported, "manifest schema_version " + std::to_string(version) +
                                             " is not supported (expected 1)");
  }

  Project project;
  try {
    project.project_id = doc.at("project_id").get<std::string>();
    project.settings = doc.at("settings").get<PreparationSettings>();
    for (const Json& a : doc.at("assets")) {
      const std::string hash = a.at("sha256").get<std::string>();
      const fs::path path = directory / a.at("path").get<std::string>();
      if (!fs::is_regular_file(path, ec)) {
        fail(ErrorCode::kIntegrityError, "asset " + a.at("path").get<std::string>() + " is missing");
      }
      Bytes bytes = read_file(path);
      if (sha256_hex(bytes) != hash) {
        fail(ErrorCode::kIntegrityError, "asset " + a.at("path").get<std::string>() + " fails its hash check");
      }
      project.assets.emplace(hash, std::move(bytes));
    }
    auto referenced = [&](const Json& j) {
      std::string hash = hash_from_path(j.get<std::string>());
      if (!project.assets.contains(hash)) {
        fail(ErrorCode::kIntegrityError, "asset " + j.get<std::string>() + " is not in the asset list");
      }
      return hash;
    };
    for (const Json& p : doc.at("panels")) {
      project.panels.push_back({p.at("panel_id").get<std::string>(), referenced(p.at("asset")),
                                p.at("width").get<int>(), p.at("height").get<int>(),
                                p.at("channels").get<int>()});
    }
    project.regions = doc.at("regions").get<std::vector<PreparedRegion>>();
    for (const Json& m : doc.at("mapped")) {
      project.mapped.push_back({m.at("mapped_id").get<std::string>(), m.at("crop_spec").get<CropSpec>(),
                                m.at("provenance").get<Provenance>(), referenced(m.at("asset"))});
    }
    for (const Json& c : doc.at("compositions")) {
      project.compositions.push_back({c.at("composition_id").get<std::string>(),
                                      c.at("panel_id").get<std::string>(), referenced(c.at("asset")),
                                      c.at("feather_width").get<int>(),
                                      c.at("mapped_ids").get<std::vector<std::string>>(),
                                      c.at("seams").get<SeamReport>()});
    }
  } catch (const Json::exception& e) {
    fail(ErrorCode::kIntegrityError, std::string("malformed manifest: ") + e.what());
  }

  std::set<std::pair<std::string, int>> keys;
  for (const auto& r : project.regions) {
    if (!keys.emplace(r.crop_spec.panel_id, r.face_index).second) {
      fail(ErrorCode::kIntegrityError, "duplicate region (" + r.crop_spec.panel_id + ", " +
                                           std::to_string(r.face_index) + ")");
    }
  }
  return project;
}

}  // namespace mexpr
