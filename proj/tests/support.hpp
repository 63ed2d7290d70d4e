// Scene-building shorthands shared by the test binaries.
#pragma once

#include <memory>
#include <vector>

#include "v2v/scenario.hpp"

namespace testing_support {

inline std::shared_ptr<const v2v::StaticScene> sceneOf(std::vector<v2v::StaticObject> objects)
{
    return std::make_shared<const v2v::StaticScene>(std::move(objects));
}

inline v2v::Vehicle car(v2v::ObjectId id, v2v::Point2 at, double heading = 0.0,
                        double height = v2v::DefaultVehicleSize::height)
{
    return v2v::Vehicle(id, at, heading, v2v::DefaultVehicleSize::length, v2v::DefaultVehicleSize::width, height);
}

inline v2v::StaticObject box(v2v::ObjectId id, v2v::StaticKind kind, double x0, double y0, double x1, double y1,
                             double height = 20.0)
{
    return {id, kind, v2v::Polygon2({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}), height};
}

}  // namespace testing_support
