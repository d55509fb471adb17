#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <string>
#include <vector>

#include "zrp/errors.hpp"

namespace zrp {

/// Minimal CSV writer: one header, rows of printf-free formatted cells.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) {
        std::filesystem::create_directories(path.parent_path());
        out_.open(path);
        if (!out_) throw ConfigError("cannot open " + path.string());
        out_ << std::setprecision(17);
        for (std::size_t i = 0; i < header.size(); ++i)
            out_ << (i ? "," : "") << header[i];
        out_ << "\n";
    }

    template <class... Ts>
    void row(const Ts&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ","), out_ << cells, first = false), ...);
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

} // namespace zrp
