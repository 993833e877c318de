#pragma once

#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "mexpr/face_preparation.hpp"
#include "mexpr/geometry.hpp"
#include "mexpr/image.hpp"
#include "mexpr/reenactment.hpp"

namespace mexpr {

struct DrivingPerformance {
  std::vector<RasterImage> frames;
  std::optional<double> fps_hint;
  std::string source_label;
};

// Throws EmptyPerformance, or UnreadableMedia on mixed frame dimensions.
void validate(const DrivingPerformance& performance);

struct Provenance {
  std::string engine;
  int frame_index = 0;
  MotionMode mode = MotionMode::kRelative;
  RetargetParams params;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct MappedFace {
  CropSpec crop_spec;
  RasterImage image;  // 512x512x3
  Provenance provenance;
};

enum class SessionState { kCreated, kGenerating, kBrowsable, kCommitted };

std::string to_string(SessionState state);

struct SessionStatus {
  SessionState state = SessionState::kCreated;
  int frame_count = 0;
  std::vector<int> available;  // fresh results for the current mode/params
  std::vector<int> pending;
  std::map<int, std::string> failures;
  std::optional<int> selected;
  RetargetParams params;
  MotionMode mode = MotionMode::kRelative;
};

// Completion tracker for one generate() call.
class GenerationHandle {
 public:
  GenerationHandle() = default;

  bool done() const;
  void wait() const;
  int requested() const;
  int completed() const;
  std::map<int, std::string> failures() const;

  struct Batch {
    mutable std::mutex mutex;
    mutable std::condition_variable cv;
    int requested = 0;
    int completed = 0;
    std::map<int, std::string> failures;
  };

 private:
  friend class MappingSession;
  explicit GenerationHandle(std::shared_ptr<Batch> batch) : batch_(std::move(batch)) {}
  std::shared_ptr<Batch> batch_;
};

struct SessionOptions {
  // 0 runs generation on the calling thread; otherwise the worker count is
  // min(workers, engine max_concurrency). Negative means "engine bound".
  int workers = -1;
};

// Stage 2 state machine. All mutating calls are serialized internally;
// reads return snapshots.
class MappingSession : public std::enable_shared_from_this<MappingSession> {
 public:
  MappingSession(std::string session_id, CropSpec crop_spec, RasterImage source_crop,
                 DrivingPerformance performance, std::shared_ptr<ReenactmentEngine> engine,
                 MotionMode mode, SessionOptions options);
  ~MappingSession();
  MappingSession(const MappingSession&) = delete;
  MappingSession& operator=(const MappingSession&) = delete;

  const std::string& id() const noexcept { return id_; }
  const CropSpec& crop_spec() const noexcept { return crop_spec_; }
  const RasterImage& source_crop() const noexcept { return *source_crop_; }
  const EngineDescriptor& engine() const noexcept { return engine_->descriptor(); }
  int frame_count() const noexcept { return static_cast<int>(performance_->frames.size()); }

  // Throws InvalidIndex (before any engine call) or SessionCommitted.
  GenerationHandle generate(const std::set<int>& indices);
  // Throws SessionCommitted, InvalidIndex, FrameNotGenerated.
  void select_keyframe(int index);
  // Returns a handle for the eager regeneration of the selected frame, if any.
  // Throws SessionCommitted, ParamOutOfRange, InvalidState.
  std::optional<GenerationHandle> set_params(const RetargetParams& params,
                                             std::optional<MotionMode> mode = std::nullopt);
  // Throws SessionCommitted, NothingSelected, StaleSelection.
  MappedFace commit();

  SessionStatus status() const;
  // Fresh result for the current mode/params. Throws InvalidIndex, FrameNotGenerated.
  std::shared_ptr<const ReenactedFrame> frame(int index) const;

  // Blocks until no generation work is queued or running.
  void wait_idle() const;
  long engine_calls() const;

  // Copies the session's state into a new session with the given id.
  // Requires an idle session.
  std::shared_ptr<MappingSession> fork(std::string session_id) const;

 private:
  using Key = std::tuple<int, MotionMode, RetargetParams>;
  struct Pending {
    std::vector<std::shared_ptr<GenerationHandle::Batch>> batches;
  };

  bool fresh_locked(int index) const;
  void check_index(int index) const;
  void check_mutable_locked() const;
  void schedule_locked(int index, const std::shared_ptr<GenerationHandle::Batch>& batch);
  bool run_one(std::unique_lock<std::mutex>& lock);
  void worker_loop(std::stop_token stop);
  void spawn_workers_locked();
  MappingSession(std::string session_id, const MappingSession& parent);
  void finish_job(const Key& key, std::shared_ptr<const ReenactedFrame> result, const std::string& error);

  std::string id_;
  CropSpec crop_spec_;
  // Immutable after construction; shared with forks.
  std::shared_ptr<const RasterImage> source_crop_;
  std::shared_ptr<const DrivingPerformance> performance_;
  std::shared_ptr<ReenactmentEngine> engine_;
  int worker_limit_ = 0;

  mutable std::mutex mutex_;
  mutable std::condition_variable cv_;
  SessionState state_ = SessionState::kCreated;
  MotionMode mode_;
  RetargetParams params_;
  std::optional<int> selected_;
  std::map<int, std::shared_ptr<const ReenactedFrame>> results_;
  std::map<int, std::string> failures_;
  std::map<Key, Pending> pending_;
  std::deque<Key> queue_;
  int running_ = 0;
  long engine_calls_ = 0;
  std::vector<std::jthread> workers_;
};

// Extracts the canonical source crop; throws SpecOutOfBounds, EmptyPerformance.
std::shared_ptr<MappingSession> create_session(std::string session_id, const PreparedRegion& region,
                                               const RasterImage& panel, DrivingPerformance performance,
                                               std::shared_ptr<ReenactmentEngine> engine,
                                               MotionMode mode = MotionMode::kRelative,
                                               SessionOptions options = {});

}  // namespace mexpr
