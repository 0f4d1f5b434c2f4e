#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace protoeval::testutil {

// Scratch directory removed when the test block ends.
class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        std::random_device rd;
        path_ = base / ("protoeval_test_" + std::to_string(rd()) + "_" +
                        std::to_string(::getpid()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

    std::string file(const std::string& name, const std::string& content) const {
        auto full = path_ / name;
        std::ofstream out(full);
        out << content;
        return full.string();
    }

    std::string read(const std::string& name) const {
        std::ifstream in(path_ / name);
        return std::string(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
    }

private:
    std::filesystem::path path_;
};

inline std::string source_dir() {
#ifdef PROTOEVAL_SOURCE_DIR
    return PROTOEVAL_SOURCE_DIR;
#else
    return ".";
#endif
}

inline std::string sample_dataset() { return source_dir() + "/data/sample"; }

}  // namespace protoeval::testutil
