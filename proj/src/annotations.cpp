#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gol/error.hpp"
#include "gol/longtail_data.hpp"

namespace gol {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) {
        throw ParseError(path + ": expected an object");
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(path + ": missing key \"" + key + "\"");
    }
    return *it;
}

const json& require_array(const json& obj, const char* key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_array()) {
        throw ParseError(path + "." + key + ": expected an array");
    }
    return v;
}

long get_id(const json& obj, const char* key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_number_integer()) {
        throw ParseError(path + "." + key + ": expected an integer");
    }
    return v.get<long>();
}

double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) {
        throw ParseError(path + ": expected a number");
    }
    return v.get<double>();
}

}  // namespace

const ImageInfo& AnnotationTable::image(long id) const {
    for (const auto& img : images) {
        if (img.id == id) return img;
    }
    throw Error("unknown image_id " + std::to_string(id));
}

std::size_t AnnotationTable::category_index(long id) const {
    for (std::size_t i = 0; i < categories.size(); ++i) {
        if (categories[i].id == id) return i;
    }
    throw Error("unknown category_id " + std::to_string(id));
}

AnnotationTable parse_annotations(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("$: invalid JSON: ") + e.what());
    }

    AnnotationTable table;
    std::map<long, std::size_t> image_pos;
    std::set<long> category_ids;

    const json& images = require_array(doc, "images", "$");
    for (std::size_t i = 0; i < images.size(); ++i) {
        const std::string path = "$.images[" + std::to_string(i) + "]";
        ImageInfo img;
        img.id = get_id(images[i], "id", path);
        img.width = get_number(require(images[i], "width", path), path + ".width");
        img.height = get_number(require(images[i], "height", path), path + ".height");
        if (!(img.width > 0.0) || !(img.height > 0.0)) {
            throw ParseError(path + ": image dimensions must be positive");
        }
        if (!image_pos.emplace(img.id, table.images.size()).second) {
            throw ParseError(path + ".id: duplicate image id " + std::to_string(img.id));
        }
        table.images.push_back(img);
    }

    const json& categories = require_array(doc, "categories", "$");
    for (std::size_t i = 0; i < categories.size(); ++i) {
        const std::string path = "$.categories[" + std::to_string(i) + "]";
        CategoryInfo cat;
        cat.id = get_id(categories[i], "id", path);
        const json& name = require(categories[i], "name", path);
        if (!name.is_string()) {
            throw ParseError(path + ".name: expected a string");
        }
        cat.name = name.get<std::string>();
        if (!category_ids.insert(cat.id).second) {
            throw ParseError(path + ".id: duplicate category id " + std::to_string(cat.id));
        }
        table.categories.push_back(std::move(cat));
    }

    const json& annotations = require_array(doc, "annotations", "$");
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        const std::string path = "$.annotations[" + std::to_string(i) + "]";
        const json& a = annotations[i];
        ObjectInfo obj;
        obj.image_id = get_id(a, "image_id", path);
        obj.category_id = get_id(a, "category_id", path);
        const auto img_it = image_pos.find(obj.image_id);
        if (img_it == image_pos.end()) {
            throw ParseError(path + ".image_id: unknown image_id " + std::to_string(obj.image_id));
        }
        if (!category_ids.contains(obj.category_id)) {
            throw ParseError(path + ".category_id: unknown category_id " +
                             std::to_string(obj.category_id));
        }
        const json& bbox = require(a, "bbox", path);
        if (!bbox.is_array() || bbox.size() != 4) {
            throw ParseError(path + ".bbox: expected [x, y, w, h]");
        }
        for (std::size_t k = 0; k < 4; ++k) {
            obj.bbox[k] = get_number(bbox[k], path + ".bbox[" + std::to_string(k) + "]");
        }
        if (obj.bbox[2] < 0.0 || obj.bbox[3] < 0.0) {
            throw ParseError(path + ".bbox: negative width or height");
        }
        obj.cx = obj.bbox[0] + obj.bbox[2] / 2.0;
        obj.cy = obj.bbox[1] + obj.bbox[3] / 2.0;
        const ImageInfo& img = table.images[img_it->second];
        if (!(obj.cx >= 0.0 && obj.cx <= img.width && obj.cy >= 0.0 && obj.cy <= img.height)) {
            throw ParseError(path + ".bbox: center (" + std::to_string(obj.cx) + ", " +
                             std::to_string(obj.cy) + ") outside image " +
                             std::to_string(img.id));
        }
        if (const auto f = a.find("features"); f != a.end()) {
            if (!f->is_array()) {
                throw ParseError(path + ".features: expected an array");
            }
            for (std::size_t k = 0; k < f->size(); ++k) {
                obj.features.push_back(
                    get_number((*f)[k], path + ".features[" + std::to_string(k) + "]"));
            }
        }
        table.objects.push_back(std::move(obj));
    }
    return table;
}

AnnotationTable load_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path + ": cannot open file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_annotations(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string serialize_annotations(const AnnotationTable& table) {
    json doc;
    doc["images"] = json::array();
    for (const auto& img : table.images) {
        doc["images"].push_back({{"id", img.id}, {"width", img.width}, {"height", img.height}});
    }
    doc["categories"] = json::array();
    for (const auto& cat : table.categories) {
        doc["categories"].push_back({{"id", cat.id}, {"name", cat.name}});
    }
    doc["annotations"] = json::array();
    for (std::size_t i = 0; i < table.objects.size(); ++i) {
        const auto& obj = table.objects[i];
        json a = {{"id", static_cast<long>(i + 1)},
                  {"image_id", obj.image_id},
                  {"category_id", obj.category_id},
                  {"bbox", obj.bbox}};
        if (!obj.features.empty()) a["features"] = obj.features;
        doc["annotations"].push_back(std::move(a));
    }
    return doc.dump();
}

ClassFrequencyTable frequency_table(const AnnotationTable& table, GroupThresholds thresholds) {
    const std::size_t n = table.categories.size();
    std::vector<long> instances(n, 0);
    std::vector<std::set<long>> images(n);
    for (const auto& obj : table.objects) {
        const std::size_t c = table.category_index(obj.category_id);
        ++instances[c];
        images[c].insert(obj.image_id);
    }
    std::vector<long> image_counts(n);
    for (std::size_t c = 0; c < n; ++c) image_counts[c] = static_cast<long>(images[c].size());
    return ClassFrequencyTable::from_counts(image_counts, instances,
                                            static_cast<long>(table.images.size()), thresholds);
}

}  // namespace gol
