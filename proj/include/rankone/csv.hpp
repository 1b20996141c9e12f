#pragma once

#include "rankone/common.hpp"

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace rankone {

// floats are printed with 12 significant digits everywhere so that reruns
// diff clean; exact values travel as num/den columns
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns) : out_(path) {
        if (!out_) throw error("cannot open " + path + " for writing");
        for (u64 i = 0; i < columns.size(); ++i) {
            if (i) out_ << ',';
            out_ << columns[i];
        }
        out_ << '\n';
        cols_ = columns.size();
    }

    CsvWriter& field(const std::string& v) { return push(v); }
    CsvWriter& field(const char* v) { return push(v); }
    CsvWriter& field(u64 v) { return push(std::to_string(v)); }
    CsvWriter& field(i64 v) { return push(std::to_string(v)); }
    CsvWriter& field(double v) { return push(format_double(v)); }

    void end_row() {
        if (in_row_ != cols_) throw error("csv row with wrong arity");
        out_ << '\n';
        in_row_ = 0;
        ++rows_;
    }

    u64 rows() const { return rows_; }

private:
    CsvWriter& push(const std::string& v) {
        if (in_row_) out_ << ',';
        out_ << v;
        ++in_row_;
        return *this;
    }

    std::ofstream out_;
    u64 cols_ = 0;
    u64 in_row_ = 0;
    u64 rows_ = 0;
};

} // namespace rankone
