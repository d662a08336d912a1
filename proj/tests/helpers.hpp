#ifndef CALICO_TESTS_HELPERS_HPP
#define CALICO_TESTS_HELPERS_HPP

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "calico/adl.hpp"
#include "calico/model.hpp"

namespace calico_tests {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(bool(in), "cannot read " << path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline std::filesystem::path assets_dir() { return CALICO_ASSETS_DIR; }

inline calico::Architecture load_asset_model(const std::string& name) {
    calico::ParseResult parsed = calico::parse(read_file(assets_dir() / "phr" / name));
    std::string errors;
    for (const auto& e : parsed.errors) errors += e.to_string() + "\n";
    REQUIRE_MESSAGE(parsed.ok(), "parse of " << name << " failed:\n" << errors);
    return *parsed.architecture;
}

/// A unique scratch directory removed when the guard dies.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("calico-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void copy_phr_workspace(const std::filesystem::path& into) {
    std::filesystem::copy(assets_dir() / "phr", into,
                          std::filesystem::copy_options::recursive |
                              std::filesystem::copy_options::overwrite_existing);
}

inline calico::Port port(std::string name, calico::Direction dir, std::string type = "Doc",
                         bool required = false) {
    return {std::move(name), dir, std::move(type), required};
}

inline calico::Component component(std::string name, std::vector<calico::Port> ports = {}) {
    calico::Component c;
    c.name = std::move(name);
    c.ports = std::move(ports);
    return c;
}

inline calico::Connector connector(std::string id, std::string src_comp, std::string src_port,
                                   std::string dst_comp, std::string dst_port) {
    return {std::move(id), {std::move(src_comp), std::move(src_port)},
            {std::move(dst_comp), std::move(dst_port)}};
}

}  // namespace calico_tests

#endif  // CALICO_TESTS_HELPERS_HPP
