#pragma once

#include "flageffect/trace.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ffx {

// One compile-execute-measure outcome. Persisted as a single JSON object
// per line; field names are part of the on-disk contract.
struct RunRecord {
    std::string run_id; // stable hash of compiler+flags+source+backend
    std::string mode;   // "ffd" | "sweep" | "oneshot" | "exhaustive"
    int row = -1;       // design row for ffd/exhaustive, -1 otherwise
    std::string label;  // level name or +/-flag for sweep/oneshot modes
    std::string flags;
    int replicate = 0;
    std::string status = "ok"; // "ok" | "unavailable"
    std::optional<double> energy_j;
    std::optional<double> time_s;
    std::optional<double> avg_power_w;
    std::string reason;
    double t_start = 0.0; // unix seconds
    double t_end = 0.0;

    std::string to_json_line() const;
    static RunRecord from_json_line(const std::string& line);
};

// Append-only newline-delimited record store with a single-writer
// contract; reads see every record appended so far. Appends are flushed
// and fsynced before returning so an interrupted campaign can resume from
// whatever reached disk.
class ResultStore {
public:
    explicit ResultStore(std::filesystem::path path);
    ~ResultStore();

    ResultStore(const ResultStore&) = delete;
    ResultStore& operator=(const ResultStore&) = delete;

    const std::filesystem::path& path() const { return path_; }
    const std::vector<RunRecord>& records() const { return records_; }
    bool contains(const std::string& run_id, int replicate) const;
    void append(const RunRecord& record);
    std::size_t size() const { return records_.size(); }

private:
    void open_writer();

    std::filesystem::path path_;
    std::vector<RunRecord> records_;
    std::set<std::pair<std::string, int>> index_;
    int fd_ = -1;
};

} // namespace ffx
