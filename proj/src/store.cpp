#include "flageffect/store.hpp"

#include <fstream>
#include <stdexcept>

#include <fcntl.h>
#include <unistd.h>

#include <json.hpp>

namespace ffx {

using nlohmann::json;

std::string RunRecord::to_json_line() const {
    json j;
    j["run_id"] = run_id;
    j["mode"] = mode;
    j["row"] = row;
    j["label"] = label;
    j["flags"] = flags;
    j["replicate"] = replicate;
    j["status"] = status;
    j["energy_j"] = energy_j ? json(*energy_j) : json(nullptr);
    j["time_s"] = time_s ? json(*time_s) : json(nullptr);
    j["avg_power_w"] = avg_power_w ? json(*avg_power_w) : json(nullptr);
    j["reason"] = reason;
    j["t_start"] = t_start;
    j["t_end"] = t_end;
    return j.dump();
}

RunRecord RunRecord::from_json_line(const std::string& line) {
    json j = json::parse(line);
    RunRecord r;
    r.run_id = j.at("run_id").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.row = j.at("row").get<int>();
    r.label = j.at("label").get<std::string>();
    r.flags = j.at("flags").get<std::string>();
    r.replicate = j.at("replicate").get<int>();
    r.status = j.at("status").get<std::string>();
    if (!j.at("energy_j").is_null()) r.energy_j = j.at("energy_j").get<double>();
    if (!j.at("time_s").is_null()) r.time_s = j.at("time_s").get<double>();
    if (!j.at("avg_power_w").is_null()) r.avg_power_w = j.at("avg_power_w").get<double>();
    r.reason = j.at("reason").get<std::string>();
    r.t_start = j.at("t_start").get<double>();
    r.t_end = j.at("t_end").get<double>();
    return r;
}

ResultStore::ResultStore(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (in) {
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            try {
                RunRecord r = RunRecord::from_json_line(line);
                index_.emplace(r.run_id, r.replicate);
                records_.push_back(std::move(r));
            } catch (const std::exception& e) {
                throw std::runtime_error("result store " + path_.string() + " line " +
                                         std::to_string(line_no) + ": " + e.what());
            }
        }
    }
}

ResultStore::~ResultStore() {
    if (fd_ >= 0) ::close(fd_);
}

void ResultStore::open_writer() {
    if (fd_ >= 0) return;
    if (path_.has_parent_path())
        std::filesystem::create_directories(path_.parent_path());
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd_ < 0)
        throw std::runtime_error("cannot open result store for append: " + path_.string());
}

bool ResultStore::contains(const std::string& run_id, int replicate) const {
    return index_.count({run_id, replicate}) > 0;
}

void ResultStore::append(const RunRecord& record) {
    open_writer();
    std::string line = record.to_json_line();
    line.push_back('\n');
    std::size_t written = 0;
    while (written < line.size()) {
        const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
        if (n < 0) throw std::runtime_error("result store write failed");
        written += static_cast<std::size_t>(n);
    }
    ::fsync(fd_);
    index_.emplace(record.run_id, record.replicate);
    records_.push_back(record);
}

} // namespace ffx
