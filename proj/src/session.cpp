#include "mexpr/session.hpp"

#include <algorithm>

#include "mexpr/error.hpp"

namespace mexpr {

void validate(const DrivingPerformance& performance) {
  if (performance.frames.empty()) fail(ErrorCode::kEmptyPerformance, "driving performance has no frames");
  const RasterImage& first = performance.frames.front();
  for (const RasterImage& f : performance.frames) {
    if (f.width() != first.width() || f.height() != first.height()) {
      fail(ErrorCode::kUnreadableMedia, "driving frames have inconsistent dimensions");
    }
  }
}

std::string to_string(SessionState state) {
  switch (state) {
    case SessionState::kCreated: return "created";
    case SessionState::kGenerating: return "generating";
    case SessionState::kBrowsable: return "browsable";
    case SessionState::kCommitted: return "committed";
  }
  return "unknown";
}

bool GenerationHandle::done() const {
  if (!batch_) return true;
  std::lock_guard lock(batch_->mutex);
  return batch_->completed >= batch_->requested;
}

void GenerationHandle::wait() const {
  if (!batch_) return;
  std::unique_lock lock(batch_->mutex);
  batch_->cv.wait(lock, [&] { return batch_->completed >= batch_->requested; });
}

int GenerationHandle::requested() const {
  if (!batch_) return 0;
  std::lock_guard lock(batch_->mutex);
  return batch_->requested;
}

int GenerationHandle::completed() const {
  if (!batch_) return 0;
  std::lock_guard lock(batch_->mutex);
  return batch_->completed;
}

std::map<int, std::string> GenerationHandle::failures() const {
  if (!batch_) return {};
  std::lock_guard lock(batch_->mutex);
  return batch_->failures;
}

namespace {

void complete(GenerationHandle::Batch& batch, int index, const std::string& error) {
  {
    std::lock_guard lock(batch.mutex);
    ++batch.completed;
    if (!error.empty()) batch.failures[index] = error;
  }
  batch.cv.notify_all();
}

}  // namespace

MappingSession::MappingSession(std::string session_id, CropSpec crop_spec, RasterImage source_crop,
                               DrivingPerformance performance, std::shared_ptr<ReenactmentEngine> engine,
                               MotionMode mode, SessionOptions options)
    : id_(std::move(session_id)),
      crop_spec_(std::move(crop_spec)),
      source_crop_(std::make_shared<const RasterImage>(std::move(source_crop))),
      performance_(std::make_shared<const DrivingPerformance>(std::move(performance))),
      engine_(std::move(engine)),
      mode_(mode) {
  validate(*performance_);
  if (!engine_) fail(ErrorCode::kEngineUnknown, "session needs an engine");
  const int bound = std::max(1, engine_->descriptor().max_concurrency);
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (options.workers == 0) {
    worker_limit_ = 0;
  } else if (options.workers < 0) {
    worker_limit_ = std::min(bound, hw);
  } else {
    worker_limit_ = std::min(bound, options.workers);
  }
}

MappingSession::~MappingSession() {
  {
    std::lock_guard lock(mutex_);
    for (auto& w : workers_) w.request_stop();
  }
  cv_.notify_all();
  workers_.clear();  // joins
}

bool MappingSession::fresh_locked(int index) const {
  const auto it = results_.find(index);
  return it != results_.end() && it->second->mode_used == mode_ && it->second->params_used == params_;
}

void MappingSession::check_index(int index) const {
  if (index < 0 || index >= frame_count()) {
    fail(ErrorCode::kInvalidIndex, "frame index " + std::to_string(index) + " outside [0, " +
                                       std::to_string(frame_count()) + ")");
  }
}

void MappingSession::check_mutable_locked() const {
  if (state_ == SessionState::kCommitted) {
    fail(ErrorCode::kSessionCommitted, "session " + id_ + " is committed and immutable");
  }
}

void MappingSession::schedule_locked(int index, const std::shared_ptr<GenerationHandle::Batch>& batch) {
  const Key key{index, mode_, params_};
  auto [it, inserted] = pending_.try_emplace(key);
  it->second.batches.push_back(batch);
  if (inserted) queue_.push_back(key);
  failures_.erase(index);
}

void MappingSession::spawn_workers_locked() {
  const int wanted = std::min<int>(worker_limit_, static_cast<int>(queue_.size()) + running_);
  while (static_cast<int>(workers_.size()) < wanted) {
    workers_.emplace_back([this](std::stop_token stop) { worker_loop(stop); });
  }
}

GenerationHandle MappingSession::generate(const std::set<int>& indices) {
  for (int i : indices) check_index(i);
  auto batch = std::make_shared<GenerationHandle::Batch>();
  std::unique_lock lock(mutex_);
  check_mutable_locked();
  for (int i : indices) {
    if (fresh_locked(i)) continue;
    ++batch->requested;
    schedule_locked(i, batch);
  }
  if (batch->requested > 0 && state_ == SessionState::kCreated) state_ = SessionState::kGenerating;
  if (worker_limit_ == 0) {
    while (run_one(lock)) {
    }
  } else {
    spawn_workers_locked();
    cv_.notify_all();
  }
  return GenerationHandle(batch);
}

bool MappingSession::run_one(std::unique_lock<std::mutex>& lock) {
  if (queue_.empty()) return false;
  const Key key = queue_.front();
  queue_.pop_front();
  ++running_;
  ++engine_calls_;
  const auto& [index, mode, params] = key;
  lock.unlock();
  std::shared_ptr<const ReenactedFrame> result;
  std::string error;
  try {
    result = std::make_shared<const ReenactedFrame>(
        reenact(*engine_, *source_crop_, performance_->frames[index], index, mode, params));
  } catch (const Error& e) {
    error = std::string(e.token()) + ": " + e.what();
  } catch (const std::exception& e) {
    error = std::string("EngineFailure: ") + e.what();
  }
  finish_job(key, std::move(result), error);
  lock.lock();
  return true;
}

void MappingSession::finish_job(const Key& key, std::shared_ptr<const ReenactedFrame> result,
                                const std::string& error) {
  std::vector<std::shared_ptr<GenerationHandle::Batch>> batches;
  {
    std::lock_guard lock(mutex_);
    --running_;
    const int index = std::get<0>(key);
    if (auto it = pending_.find(key); it != pending_.end()) {
      batches = std::move(it->second.batches);
      pending_.erase(it);
    }
    if (state_ != SessionState::kCommitted) {
      const bool current = std::get<1>(key) == mode_ && std::get<2>(key) == params_;
      if (result) {
        // A late result for outdated params never displaces a fresh one.
        if (current || !fresh_locked(index)) results_[index] = std::move(result);
        if (state_ != SessionState::kBrowsable) state_ = SessionState::kBrowsable;
      } else if (current) {
        failures_[index] = error;
      }
    }
  }
  for (auto& b : batches) complete(*b, std::get<0>(key), error);
  cv_.notify_all();
}

void MappingSession::worker_loop(std::stop_token stop) {
  std::unique_lock lock(mutex_);
  while (!stop.stop_requested()) {
    cv_.wait(lock, [&] { return stop.stop_requested() || !queue_.empty(); });
    if (stop.stop_requested()) break;
    run_one(lock);
  }
}

void MappingSession::select_keyframe(int index) {
  std::lock_guard lock(mutex_);
  check_mutable_locked();
  check_index(index);
  if (!results_.contains(index)) {
    fail(ErrorCode::kFrameNotGenerated, "frame " + std::to_string(index) + " has not been generated");
  }
  selected_ = index;
}

std::optional<GenerationHandle> MappingSession::set_params(const RetargetParams& params,
                                                           std::optional<MotionMode> mode) {
  std::unique_lock lock(mutex_);
  check_mutable_locked();
  validate(params);
  if (state_ != SessionState::kBrowsable) {
    fail(ErrorCode::kInvalidState, "parameters can be tuned once a frame is browsable");
  }
  const MotionMode next_mode = mode.value_or(mode_);
  if (params == params_ && next_mode == mode_) return std::nullopt;
  params_ = params;
  mode_ = next_mode;
  failures_.clear();
  if (!selected_) return std::nullopt;

  lock.unlock();
  return generate({*selected_});
}

MappedFace MappingSession::commit() {
  std::lock_guard lock(mutex_);
  check_mutable_locked();
  if (!selected_) fail(ErrorCode::kNothingSelected, "no keyframe selected");
  if (!fresh_locked(*selected_)) {
    fail(ErrorCode::kStaleSelection, "selected frame predates the current parameters");
  }
  const auto& frame = results_.at(*selected_);
  state_ = SessionState::kCommitted;
  std::vector<std::shared_ptr<GenerationHandle::Batch>> dropped;
  for (auto& [key, p] : pending_) {
    if (std::find(queue_.begin(), queue_.end(), key) == queue_.end()) continue;
    for (auto& b : p.batches) complete(*b, std::get<0>(key), "cancelled by commit");
  }
  for (const Key& key : queue_) pending_.erase(key);
  queue_.clear();
  return {crop_spec_, frame->image,
          Provenance{engine_->descriptor().name, *selected_, frame->mode_used, frame->params_used}};
}

SessionStatus MappingSession::status() const {
  std::lock_guard lock(mutex_);
  SessionStatus s;
  s.state = state_;
  s.frame_count = frame_count();
  for (const auto& [i, r] : results_) {
    if (fresh_locked(i)) s.available.push_back(i);
  }
  std::set<int> pending;
  for (const auto& [key, p] : pending_) pending.insert(std::get<0>(key));
  s.pending.assign(pending.begin(), pending.end());
  s.failures = failures_;
  s.selected = selected_;
  s.params = params_;
  s.mode = mode_;
  return s;
}

std::shared_ptr<const ReenactedFrame> MappingSession::frame(int index) const {
  check_index(index);
  std::lock_guard lock(mutex_);
  if (!fresh_locked(index)) {
    fail(ErrorCode::kFrameNotGenerated,
         "frame " + std::to_string(index) + " is not generated for the current parameters");
  }
  return results_.at(index);
}

void MappingSession::wait_idle() const {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return queue_.empty() && running_ == 0; });
}

long MappingSession::engine_calls() const {
  std::lock_guard lock(mutex_);
  return engine_calls_;
}

MappingSession::MappingSession(std::string session_id, const MappingSession& parent)
    : id_(std::move(session_id)),
      crop_spec_(parent.crop_spec_),
      source_crop_(parent.source_crop_),
      performance_(parent.performance_),
      engine_(parent.engine_),
      worker_limit_(parent.worker_limit_),
      state_(parent.state_),
      mode_(parent.mode_),
      params_(parent.params_),
      selected_(parent.selected_),
      results_(parent.results_),
      failures_(parent.failures_),
      engine_calls_(parent.engine_calls_) {}

std::shared_ptr<MappingSession> MappingSession::fork(std::string session_id) const {
  std::lock_guard lock(mutex_);
  if (!queue_.empty() || running_ != 0) fail(ErrorCode::kInvalidState, "cannot fork a busy session");
  return std::shared_ptr<MappingSession>(new MappingSession(std::move(session_id), *this));
}

std::shared_ptr<MappingSession> create_session(std::string session_id, const PreparedRegion& region,
                                               const RasterImage& panel, DrivingPerformance performance,
                                               std::shared_ptr<ReenactmentEngine> engine, MotionMode mode,
                                               SessionOptions options) {
  validate(performance);
  RasterImage crop = extract_crop(panel, region.crop_spec);
  return std::make_shared<MappingSession>(std::move(session_id), region.crop_spec, std::move(crop),
                                          std::move(performance), std::move(engine), mode, options);
}

}  // namespace mexpr
