#include "gia/bundle_io.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gia {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "f32le blobs assume a little-endian host");

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed: " + path.string());
}

void append_f32(std::string& out, const Matrix& m) {
    const std::size_t start = out.size();
    out.resize(start + static_cast<std::size_t>(m.size()) * sizeof(float));
    char* dst = out.data() + start;
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            const float v = static_cast<float>(m(i, j));
            std::memcpy(dst, &v, sizeof(float));
            dst += sizeof(float);
        }
}

Matrix parse_f32(const std::string& blob, std::size_t offset, Index rows, Index cols) {
    const std::size_t bytes = static_cast<std::size_t>(rows * cols) * sizeof(float);
    require(offset + bytes <= blob.size(), "f32 blob truncated");
    Matrix m(rows, cols);
    const char* src = blob.data() + offset;
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) {
            float v;
            std::memcpy(&v, src, sizeof(float));
            src += sizeof(float);
            m(i, j) = v;
        }
    return m;
}

GraphBundle read_bundle(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error("graph bundle directory not found: " + dir.string());
    const json meta = json::parse(read_file(dir / "meta.json"));
    const Index n = meta.at("n").get<Index>();
    const Index d = meta.at("d").get<Index>();
    const Index classes = meta.at("C").get<Index>();
    require(meta.value("feature_dtype", std::string("f32le")) == "f32le", "unsupported feature_dtype");

    std::vector<Edge> edges;
    {
        std::istringstream in(read_file(dir / "edges.txt"));
        Index u, v;
        while (in >> u >> v) edges.push_back({u, v});
        require(in.eof(), "edges.txt: malformed line");
    }
    if (meta.contains("edge_count"))
        require(static_cast<Index>(edges.size()) == meta["edge_count"].get<Index>(),
                "edges.txt: edge count does not match meta.json");

    Matrix x = parse_f32(read_file(dir / "features.bin"), 0, n, d);

    IndexList labels;
    {
        std::istringstream in(read_file(dir / "labels.txt"));
        Index y;
        while (in >> y) labels.push_back(y);
    }
    const json sj = json::parse(read_file(dir / "splits.json"));
    Splits splits{sj.at("train").get<IndexList>(), sj.at("val").get<IndexList>(), sj.at("test").get<IndexList>()};
    return build_graph(std::move(edges), std::move(x), std::move(labels), std::move(splits), classes);
}

void write_bundle(const GraphBundle& g, const fs::path& dir) {
    fs::create_directories(dir);
    json meta = {{"n", g.num_nodes()},
                 {"d", g.feature_dim()},
                 {"C", g.num_classes()},
                 {"edge_count", g.num_edges()},
                 {"feature_dtype", "f32le"}};
    write_file(dir / "meta.json", meta.dump(2) + "\n");

    std::string edges;
    for (const auto& e : g.edges()) edges += std::to_string(e.u) + " " + std::to_string(e.v) + "\n";
    write_file(dir / "edges.txt", edges);

    std::string blob;
    append_f32(blob, g.features());
    write_file(dir / "features.bin", blob);

    std::string labels;
    for (Index y : g.labels()) labels += std::to_string(y) + "\n";
    write_file(dir / "labels.txt", labels);

    json splits = {{"train", g.splits().train}, {"val", g.splits().val}, {"test", g.splits().test}};
    write_file(dir / "splits.json", splits.dump() + "\n");
}

}  // namespace gia
