#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mexpr/codec.hpp"
#include "mexpr/composition.hpp"
#include "mexpr/face_preparation.hpp"
#include "mexpr/session.hpp"

namespace mexpr {

inline constexpr int kSchemaVersion = 1;

struct PanelRecord {
  std::string panel_id;
  std::string asset;  // content hash
  int width = 0;
  int height = 0;
  int channels = 0;
  friend bool operator==(const PanelRecord&, const PanelRecord&) = default;
};

struct MappedRecord {
  std::string mapped_id;
  CropSpec crop_spec;
  Provenance provenance;
  std::string asset;
  friend bool operator==(const MappedRecord&, const MappedRecord&) = default;
};

struct CompositionRecord {
  std::string composition_id;
  std::string panel_id;
  std::string asset;
  int feather_width = 0;
  std::vector<std::string> mapped_ids;  // paste order
  SeamReport seams;
  friend bool operator==(const CompositionRecord&, const CompositionRecord&) = default;
};

struct Project {
  std::string project_id = "project";
  std::vector<PanelRecord> panels;
  std::vector<PreparedRegion> regions;
  std::vector<MappedRecord> mapped;
  std::vector<CompositionRecord> compositions;
  PreparationSettings settings;
  std::map<std::string, Bytes> assets;  // hash -> PNG bytes

  // Stores bytes under their SHA-256 and returns the hash.
  std::string add_asset(Bytes bytes);
  // Throws NotFound.
  const Bytes& asset(const std::string& hash) const;

  const PanelRecord* find_panel(const std::string& panel_id) const;
  const PreparedRegion* find_region(const std::string& panel_id, int face_index) const;
  const MappedRecord* find_mapped(const std::string& mapped_id) const;
  const CompositionRecord* find_composition(const std::string& composition_id) const;

  friend bool operator==(const Project&, const Project&) = default;
};

std::string asset_path(const std::string& hash);

// Deterministic manifest text.
std::string manifest_text(const Project& project);

// Writes assets/<hash>.png and then manifest.json (atomically via rename).
// Returns the manifest text. Throws IOFailure.
std::string save(const Project& project, const std::filesystem::path& directory);

// Throws MissingManifest, VersionUnsupported, IntegrityError.
Project load(const std::filesystem::path& directory);

}  // namespace mexpr
