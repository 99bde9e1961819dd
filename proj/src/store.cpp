/* Copyright 2026 The envnet Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "envnet/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

#include "envnet/error.hpp"

namespace envnet {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kTxnDir = ".txn";
constexpr std::string_view kCommitMarker = "COMMIT";

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::string> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return std::move(ss).str();
}

void fsync_dir(const fs::path& dir) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

void write_durable(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw Error(ErrorCode::kStoreWriteFailure, "cannot create " + path.string());
  std::size_t done = 0;
  while (done < content.size()) {
    auto n = ::write(fd, content.data() + done, content.size() - done);
    if (n < 0) {
      ::close(fd);
      throw Error(ErrorCode::kStoreWriteFailure, "write failed for " + path.string());
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    throw Error(ErrorCode::kStoreWriteFailure, "fsync failed for " + path.string());
  }
  ::close(fd);
}

std::string unique_txn_id() {
  static std::atomic<unsigned> counter{0};
  auto now = std::chrono::steady_clock::now().time_since_epoch().count();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%llx-%x-%x", static_cast<unsigned long long>(now),
                static_cast<unsigned>(::getpid()), counter.fetch_add(1));
  return buf;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.emplace_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

std::vector<SensorRecord> parse_record_file(std::string_view text, const std::string& where) {
  std::vector<SensorRecord> out;
  auto lines = split_lines(text);
  if (lines.empty() || lines.front() != kRecordHeader) {
    throw Error(ErrorCode::kCorruptStore, where + ": missing record header");
  }
  out.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto rec = parse_record_line(lines[i]);
    if (!rec) throw Error(ErrorCode::kCorruptStore, where + ":" + std::to_string(i + 1) + ": bad record line");
    out.push_back(*rec);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SensorRecord& a, const SensorRecord& b) { return a.ts_utc < b.ts_utc; });
  return out;
}

std::vector<std::string> months_overlapping(Instant from, Instant to) {
  std::vector<std::string> months;
  for (Instant t = from; t < to; t = next_month_start(t)) months.push_back(month_key(t));
  return months;
}

}  // namespace

std::string record_file_path(std::string_view channel_id, std::string_view month) {
  std::string p = "data/";
  p += channel_id;
  p += '/';
  p += month;
  p += ".csv";
  return p;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string format_record_line(const SensorRecord& r) {
  std::string line = format_iso_utc(r.ts_utc);
  line += ',';
  if (r.raw_value) line += format_value(*r.raw_value);
  line += ',';
  if (r.eng_value) line += format_value(*r.eng_value);
  line += ',';
  line += r.flags.to_string();
  return line;
}

std::optional<SensorRecord> parse_record_line(std::string_view line) {
  std::string_view fields[4];
  std::size_t n = 0;
  std::size_t pos = 0;
  while (true) {
    auto comma = line.find(',', pos);
    if (n == 4) return std::nullopt;
    if (comma == std::string_view::npos) {
      fields[n++] = line.substr(pos);
      break;
    }
    fields[n++] = line.substr(pos, comma - pos);
    pos = comma + 1;
  }
  if (n != 4) return std::nullopt;
  SensorRecord r;
  auto ts = parse_iso_utc(fields[0]);
  if (!ts) return std::nullopt;
  r.ts_utc = *ts;
  if (!fields[1].empty()) {
    r.raw_value = parse_number(fields[1]);
    if (!r.raw_value) return std::nullopt;
  }
  if (!fields[2].empty()) {
    r.eng_value = parse_number(fields[2]);
    if (!r.eng_value) return std::nullopt;
  }
  auto flags = FlagSet::parse(fields[3]);
  if (!flags) return std::nullopt;
  r.flags = *flags;
  return r;
}

SensorRecord quantize(SensorRecord r) {
  if (r.raw_value) r.raw_value = parse_number(format_value(*r.raw_value));
  if (r.eng_value) r.eng_value = parse_number(format_value(*r.eng_value));
  return r;
}

// ---------------------------------------------------------------------------

struct CacheEntry {
  fs::path source;
  std::uintmax_t size = 0;
  fs::file_time_type mtime;
  std::shared_ptr<const std::vector<SensorRecord>> records;
};

struct Store::Impl {
  fs::path root;

  mutable std::shared_mutex cache_mu;
  mutable std::unordered_map<std::string, CacheEntry> cache;

  mutable std::mutex manifest_mu;
  mutable std::optional<Manifest> manifest;
  mutable fs::path manifest_source;
  mutable fs::file_time_type manifest_mtime;
  mutable std::uintmax_t manifest_size = 0;

  std::mutex hook_mu;
  WriteHook hook;

  void notify(std::string_view phase, std::size_t step) {
    WriteHook h;
    {
      std::lock_guard lock(hook_mu);
      h = hook;
    }
    if (h) h(phase, step);
  }

  // Committed transactions not yet applied shadow the live file.
  fs::path resolve(std::string_view rel) const {
    std::error_code ec;
    fs::path txn_root = root / kTxnDir;
    if (fs::is_directory(txn_root, ec)) {
      for (const auto& entry : fs::directory_iterator(txn_root, ec)) {
        if (!fs::exists(entry.path() / kCommitMarker, ec)) continue;
        fs::path staged = entry.path() / "f" / fs::path(rel);
        if (fs::exists(staged, ec)) return staged;
      }
    }
    return root / fs::path(rel);
  }

  std::optional<std::string> read_text(std::string_view rel) const {
    // A concurrent writer may move a staged file into place between resolve
    // and read; retry once it has.
    for (int attempt = 0; attempt < 4; ++attempt) {
      fs::path p = resolve(rel);
      std::error_code ec;
      if (!fs::exists(p, ec)) {
        if (p == root / fs::path(rel)) return std::nullopt;
        continue;
      }
      if (auto text = slurp(p)) return text;
    }
    return std::nullopt;
  }

  Manifest load_manifest() const {
    std::lock_guard lock(manifest_mu);
    fs::path p = resolve(kManifestFile);
    std::error_code ec;
    auto size = fs::file_size(p, ec);
    if (ec) throw Error(ErrorCode::kNotAStore, "no manifest at " + (root / kManifestFile).string());
    auto mtime = fs::last_write_time(p, ec);
    if (manifest && p == manifest_source && size == manifest_size && mtime == manifest_mtime) return *manifest;
    auto text = slurp(p);
    if (!text) throw Error(ErrorCode::kCorruptManifest, "cannot read manifest " + p.string());
    nlohmann::json j = nlohmann::json::parse(*text, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::kCorruptManifest, "corrupt manifest " + p.string() + ": not valid JSON");
    }
    if (j.value("format", std::string()) != "envnet-store") {
      throw Error(ErrorCode::kCorruptManifest, "corrupt manifest " + p.string() + ": wrong format tag");
    }
    try {
      manifest = Manifest::from_json(j);
    } catch (const Error& e) {
      throw Error(ErrorCode::kCorruptManifest, "corrupt manifest " + p.string() + ": " + e.what());
    }
    manifest_source = p;
    manifest_size = size;
    manifest_mtime = mtime;
    return *manifest;
  }

  std::shared_ptr<const std::vector<SensorRecord>> load_month(const std::string& rel) const {
    static const auto kEmpty = std::make_shared<const std::vector<SensorRecord>>();
    for (int attempt = 0; attempt < 4; ++attempt) {
      fs::path p = resolve(rel);
      std::error_code ec;
      auto size = fs::file_size(p, ec);
      if (ec) {
        if (p == root / fs::path(rel)) return kEmpty;
        continue;
      }
      auto mtime = fs::last_write_time(p, ec);
      {
        std::shared_lock lock(cache_mu);
        auto it = cache.find(rel);
        if (it != cache.end() && it->second.source == p && it->second.size == size && it->second.mtime == mtime) {
          return it->second.records;
        }
      }
      auto text = slurp(p);
      if (!text) continue;
      auto records = std::make_shared<const std::vector<SensorRecord>>(parse_record_file(*text, p.string()));
      std::unique_lock lock(cache_mu);
      cache[rel] = CacheEntry{p, size, mtime, records};
      return records;
    }
    throw Error(ErrorCode::kCorruptStore, "cannot read " + rel);
  }

  void invalidate(const std::vector<std::string>& rels) {
    {
      std::unique_lock lock(cache_mu);
      for (const auto& r : rels) cache.erase(r);
    }
    std::lock_guard lock(manifest_mu);
    manifest.reset();
  }

  // Rolls committed transactions forward and discards uncommitted ones.
  void recover() {
    std::error_code ec;
    fs::path txn_root = root / kTxnDir;
    if (!fs::is_directory(txn_root, ec)) return;
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(txn_root, ec)) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    std::vector<std::string> touched;
    for (const auto& dir : dirs) {
      if (fs::exists(dir / kCommitMarker, ec)) {
        auto listing = slurp(dir / kCommitMarker).value_or("");
        for (const auto& rel : split_lines(listing)) {
          if (rel.empty()) continue;
          fs::path staged = dir / "f" / rel;
          if (!fs::exists(staged, ec)) continue;
          fs::create_directories((root / rel).parent_path());
          fs::rename(staged, root / rel);
          touched.push_back(rel);
        }
      }
      fs::remove_all(dir, ec);
    }
    fsync_dir(root);
    invalidate(touched);
  }
};

Store Store::open(const fs::path& root, bool create_if_missing) {
  std::error_code ec;
  if (!fs::exists(root, ec)) {
    if (!create_if_missing) throw Error(ErrorCode::kNotAStore, "no store at " + root.string());
    fs::create_directories(root, ec);
    if (ec) throw Error(ErrorCode::kStoreWriteFailure, "cannot create " + root.string());
  }
  if (!fs::is_directory(root, ec)) throw Error(ErrorCode::kNotAStore, root.string() + " is not a directory");
  auto impl = std::make_shared<Impl>();
  impl->root = fs::absolute(root);
  Store store(impl);
  if (!fs::exists(impl->resolve(kManifestFile), ec)) {
    if (!create_if_missing) throw Error(ErrorCode::kNotAStore, "no manifest in " + root.string());
    auto batch = store.begin_write();
    batch.set_manifest(Manifest{});
    batch.put_file(std::string(kLedgerFile), "");
    batch.commit();
  }
  impl->load_manifest();
  return store;
}

const fs::path& Store::root() const { return impl_->root; }

Manifest Store::manifest() const { return impl_->load_manifest(); }

void Store::set_write_hook(WriteHook hook) {
  std::lock_guard lock(impl_->hook_mu);
  impl_->hook = std::move(hook);
}

std::optional<std::string> Store::read_file(std::string_view relpath) const { return impl_->read_text(relpath); }

AppendResult Store::append_records(std::string_view channel_id, std::span<const SensorRecord> records) {
  auto batch = begin_write();
  auto result = batch.append(channel_id, records);
  batch.commit();
  return result;
}

std::vector<SensorRecord> Store::read_records(std::string_view channel_id, Instant from, Instant to) const {
  impl_->load_manifest().channel(channel_id);
  if (from > to) throw Error(ErrorCode::kInvertedRange, "from is after to");
  std::vector<SensorRecord> out;
  for (const auto& month : months_overlapping(from, to)) {
    auto records = impl_->load_month(record_file_path(channel_id, month));
    auto lo = std::lower_bound(records->begin(), records->end(), from,
                               [](const SensorRecord& r, Instant t) { return r.ts_utc < t; });
    auto hi = std::lower_bound(lo, records->end(), to,
                               [](const SensorRecord& r, Instant t) { return r.ts_utc < t; });
    out.insert(out.end(), lo, hi);
  }
  return out;
}

std::vector<std::string> Store::channel_months(std::string_view channel_id) const {
  impl_->load_manifest().channel(channel_id);
  std::set<std::string> months;
  std::error_code ec;
  auto collect = [&](const fs::path& dir) {
    if (!fs::is_directory(dir, ec)) return;
    for (const auto& e : fs::directory_iterator(dir, ec)) {
      if (e.path().extension() == ".csv") months.insert(e.path().stem().string());
    }
  };
  collect(impl_->root / "data" / std::string(channel_id));
  fs::path txn_root = impl_->root / kTxnDir;
  if (fs::is_directory(txn_root, ec)) {
    for (const auto& entry : fs::directory_iterator(txn_root, ec)) {
      if (fs::exists(entry.path() / kCommitMarker, ec)) collect(entry.path() / "f" / "data" / std::string(channel_id));
    }
  }
  return {months.begin(), months.end()};
}

// ---------------------------------------------------------------------------

struct WriteBatch::State {
  std::shared_ptr<Store::Impl> impl;
  int lock_fd = -1;
  Manifest manifest;
  std::map<std::string, std::string> files;
  std::map<std::string, std::set<std::int64_t>> month_ts;
  bool done = false;

  ~State() { unlock(); }

  void unlock() {
    if (lock_fd < 0) return;
    ::flock(lock_fd, LOCK_UN);
    ::close(lock_fd);
    lock_fd = -1;
  }

  std::string current(const std::string& rel) {
    auto it = files.find(rel);
    if (it != files.end()) return it->second;
    return impl->read_text(rel).value_or("");
  }

  std::set<std::int64_t>& timestamps(const std::string& rel) {
    auto it = month_ts.find(rel);
    if (it != month_ts.end()) return it->second;
    auto& set = month_ts[rel];
    for (const auto& r : *impl->load_month(rel)) set.insert(to_epoch(r.ts_utc));
    return set;
  }
};

WriteBatch::WriteBatch(std::unique_ptr<State> state) : state_(std::move(state)) {}
WriteBatch::WriteBatch(WriteBatch&&) noexcept = default;
WriteBatch::~WriteBatch() = default;

WriteBatch Store::begin_write() {
  auto state = std::make_unique<WriteBatch::State>();
  state->impl = impl_;
  fs::path lock_path = impl_->root / ".lock";
  state->lock_fd = ::open(lock_path.c_str(), O_RDWR | O_CREAT, 0644);
  if (state->lock_fd < 0) throw Error(ErrorCode::kStoreWriteFailure, "cannot open " + lock_path.string());
  if (::flock(state->lock_fd, LOCK_EX) != 0) throw Error(ErrorCode::kStoreWriteFailure, "cannot lock store");
  impl_->recover();
  std::error_code ec;
  if (fs::exists(impl_->resolve(kManifestFile), ec)) state->manifest = impl_->load_manifest();
  return WriteBatch(std::move(state));
}

AppendResult WriteBatch::append(std::string_view channel_id, std::span<const SensorRecord> records) {
  auto& st = *state_;
  st.manifest.channel(channel_id);
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].ts_utc < records[i - 1].ts_utc) {
      throw Error(ErrorCode::kUnsortedInput, "records for " + std::string(channel_id) + " are not sorted by ts_utc");
    }
  }
  AppendResult result;
  for (const auto& r : records) {
    if (!r.raw_value && !r.eng_value && !r.flags.contains(QualityFlag::kMissing)) {
      throw Error(ErrorCode::kInvalidArgument, "record without value must carry MISSING");
    }
    std::string rel = record_file_path(channel_id, month_key(r.ts_utc));
    auto& ts = st.timestamps(rel);
    if (!ts.insert(to_epoch(r.ts_utc)).second) {
      ++result.duplicates;
      continue;
    }
    auto it = st.files.find(rel);
    if (it == st.files.end()) {
      std::string content = st.impl->read_text(rel).value_or("");
      if (content.empty()) {
        content = kRecordHeader;
        content += '\n';
      }
      it = st.files.emplace(rel, std::move(content)).first;
    }
    it->second += format_record_line(r);
    it->second += '\n';
    ++result.written;
    result.written_ts.push_back(r.ts_utc);
  }
  return result;
}

void WriteBatch::replace_range(std::string_view channel_id, Instant from, Instant to,
                               std::vector<SensorRecord> replacement) {
  auto& st = *state_;
  st.manifest.channel(channel_id);
  std::set<std::string> months;
  for (const auto& m : months_overlapping(from, to)) months.insert(m);
  for (const auto& r : replacement) months.insert(month_key(r.ts_utc));
  for (const auto& month : months) {
    std::string rel = record_file_path(channel_id, month);
    std::string text = st.current(rel);
    std::vector<SensorRecord> kept;
    if (!text.empty()) {
      for (const auto& r : parse_record_file(text, rel)) {
        if (r.ts_utc < from || r.ts_utc >= to) kept.push_back(r);
      }
    }
    for (const auto& r : replacement) {
      if (month_key(r.ts_utc) == month) kept.push_back(r);
    }
    std::stable_sort(kept.begin(), kept.end(),
                     [](const SensorRecord& a, const SensorRecord& b) { return a.ts_utc < b.ts_utc; });
    std::string content(kRecordHeader);
    content += '\n';
    auto& ts = st.month_ts[rel];
    ts.clear();
    for (const auto& r : kept) {
      content += format_record_line(r);
      content += '\n';
      ts.insert(to_epoch(r.ts_utc));
    }
    st.files[rel] = std::move(content);
  }
}

void WriteBatch::put_file(std::string relpath, std::string content) { state_->files[std::move(relpath)] = std::move(content); }

void WriteBatch::append_ledger_line(std::string_view line) {
  std::string rel(kLedgerFile);
  std::string content = state_->current(rel);
  content += line;
  content += '\n';
  state_->files[rel] = std::move(content);
}

void WriteBatch::set_manifest(const Manifest& manifest) {
  state_->manifest = manifest;
  state_->files[std::string(kManifestFile)] = manifest.to_json().dump(2) + "\n";
}

void WriteBatch::commit() {
  auto& st = *state_;
  if (st.done) throw Error(ErrorCode::kInvalidArgument, "batch already committed");
  st.done = true;
  struct Unlock {
    State& st;
    ~Unlock() { st.unlock(); }
  } unlock_on_exit{st};
  if (st.files.empty()) return;
  auto& impl = *st.impl;
  fs::path dir = impl.root / kTxnDir / unique_txn_id();
  std::size_t step = 0;
  std::string listing;
  try {
    for (const auto& [rel, content] : st.files) {
      impl.notify("stage", step++);
      write_durable(dir / "f" / rel, content);
      listing += rel;
      listing += '\n';
    }
    impl.notify("commit", step++);
    write_durable(dir / "COMMIT.tmp", listing);
    fs::rename(dir / "COMMIT.tmp", dir / kCommitMarker);
    fsync_dir(dir);
  } catch (const std::exception& e) {
    std::error_code ec;
    fs::remove_all(dir, ec);
    throw Error(ErrorCode::kStoreWriteFailure, std::string("store write failed: ") + e.what());
  }
  std::vector<std::string> rels;
  try {
    for (const auto& [rel, content] : st.files) {
      impl.notify("apply", step++);
      fs::create_directories((impl.root / rel).parent_path());
      fs::rename(dir / "f" / rel, impl.root / rel);
      rels.push_back(rel);
    }
    fsync_dir(impl.root);
    fs::remove_all(dir);
  } catch (const std::exception& e) {
    // Committed: readers see the staged files and the next writer finishes the move.
    impl.invalidate(rels);
    throw Error(ErrorCode::kStoreWriteFailure, std::string("store apply incomplete: ") + e.what());
  }
  for (const auto& [rel, content] : st.files) rels.push_back(rel);
  impl.invalidate(rels);
}

}  // namespace envnet
