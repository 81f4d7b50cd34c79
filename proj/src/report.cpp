#include "jumpbsde/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace jumpbsde {

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

std::string with_fingerprint(std::string_view fingerprint, std::string_view body) {
    std::string out = "# config_fingerprint=";
    out += fingerprint;
    out += '\n';
    out += body;
    return out;
}

std::string value_field_csv(const MarkovModel& model, const ValueField& u) {
    std::string out = "time,state,u\n";
    for (std::size_t i = 0; i < u.grid().size(); ++i) {
        for (StateIndex x = 0; x < u.states(); ++x) {
            out += format_double(u.grid()[i]);
            out += ',';
            out += model.states()[x];
            out += ',';
            out += format_double(u.at(i, x));
            out += '\n';
        }
    }
    return out;
}

ValueField read_value_field_csv(const std::filesystem::path& path, const MarkovModel& model) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read value file " + path.string());
    }
    const std::size_t k = model.size();
    std::string line;
    bool header = false;
    std::vector<double> times;
    std::vector<double> values;
    std::vector<bool> seen;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != "time,state,u") {
                throw std::runtime_error("value file header must be time,state,u");
            }
            header = true;
            continue;
        }
        std::stringstream ss(line);
        std::string t_s, state, v_s;
        if (!std::getline(ss, t_s, ',') || !std::getline(ss, state, ',') ||
            !std::getline(ss, v_s)) {
            throw std::runtime_error("malformed row at line " + std::to_string(line_no));
        }
        double t = 0.0;
        double v = 0.0;
        try {
            t = std::stod(t_s);
            v = std::stod(v_s);
        } catch (const std::exception&) {
            throw std::runtime_error("non-numeric entry at line " + std::to_string(line_no));
        }
        const StateIndex x = model.index_of(state);
        if (times.empty() || t != times.back()) {
            times.push_back(t);
            values.resize(times.size() * k, 0.0);
            seen.resize(times.size() * k, false);
        }
        const std::size_t slot = (times.size() - 1) * k + x;
        if (seen[slot]) {
            throw std::runtime_error("duplicate entry at line " + std::to_string(line_no));
        }
        seen[slot] = true;
        values[slot] = v;
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) {
            throw std::runtime_error("value file misses state " + model.states()[i % k] +
                                     " at time " + format_double(times[i / k]));
        }
    }
    return ValueField(TimeGrid(std::move(times)), k, std::move(values));
}

std::string trajectories_csv(const MarkovModel& model, const std::vector<Trajectory>& paths) {
    std::string out = "path_id,jump_index,time,from_state,to_state\n";
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const auto& jumps = paths[p].jumps();
        for (std::size_t n = 0; n < jumps.size(); ++n) {
            out += std::to_string(p) + ',' + std::to_string(n) + ',' +
                   format_double(jumps[n].time) + ',' + model.states()[jumps[n].from] + ',' +
                   model.states()[jumps[n].to] + '\n';
        }
    }
    return out;
}

}  // namespace jumpbsde
