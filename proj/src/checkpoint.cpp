#include "gia/checkpoint.hpp"

#include "gia/bundle_io.hpp"

#include <json.hpp>

namespace gia {

using nlohmann::json;

void save_checkpoint(const GnnModel& model, const std::filesystem::path& path) {
    json blocks = json::array();
    std::string blob;
    for (const Matrix* p : model.parameters()) {
        blocks.push_back({p->rows(), p->cols()});
        append_f32(blob, *p);
    }
    const json header = {
        {"arch", arch_name(model.arch)},
        {"k", model.dims.layers},
        {"dims", {{"input", model.dims.input}, {"hidden", model.dims.hidden}, {"output", model.dims.output}}},
        {"options",
         {{"layer_norm_pre", model.options.layer_norm_pre},
          {"layer_norm_inter", model.options.layer_norm_inter},
          {"dropout", model.options.dropout},
          {"guard_threshold", model.options.guard_threshold},
          {"bias", model.options.bias}}},
        {"seed", model.seed},
        {"blocks", blocks},
    };
    write_file(path, header.dump() + "\n" + blob);
}

GnnModel load_checkpoint(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    const auto newline = content.find('\n');
    require(newline != std::string::npos, "checkpoint: missing header line in " + path.string());
    const json header = json::parse(content.substr(0, newline));

    ModelDims dims;
    dims.input = header.at("dims").at("input").get<Index>();
    dims.hidden = header.at("dims").at("hidden").get<Index>();
    dims.output = header.at("dims").at("output").get<Index>();
    dims.layers = header.at("k").get<Index>();
    const json& o = header.at("options");
    ModelOptions options;
    options.layer_norm_pre = o.at("layer_norm_pre").get<bool>();
    options.layer_norm_inter = o.at("layer_norm_inter").get<bool>();
    options.dropout = o.at("dropout").get<Real>();
    options.guard_threshold = o.at("guard_threshold").get<Real>();
    options.bias = o.at("bias").get<bool>();

    GnnModel model = init_model(parse_arch(header.at("arch").get<std::string>()), dims, options,
                                header.at("seed").get<std::uint64_t>());
    auto params = model.parameters();
    const json& blocks = header.at("blocks");
    require(blocks.size() == params.size(), "checkpoint: block count does not match the architecture");
    std::size_t offset = newline + 1;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Index rows = blocks[i][0].get<Index>();
        const Index cols = blocks[i][1].get<Index>();
        require(rows == params[i]->rows() && cols == params[i]->cols(), "checkpoint: block shape mismatch");
        *params[i] = parse_f32(content, offset, rows, cols);
        offset += static_cast<std::size_t>(rows * cols) * sizeof(float);
    }
    require(offset == content.size(), "checkpoint: trailing bytes");
    return model;
}

}  // namespace gia
