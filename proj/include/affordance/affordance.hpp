#pragma once

#include "affordance/camera.hpp"
#include "affordance/constraints.hpp"
#include "affordance/error.hpp"
#include "affordance/grid.hpp"
#include "affordance/io.hpp"
#include "affordance/lifting.hpp"
#include "affordance/pipeline.hpp"
#include "affordance/scene.hpp"
#include "affordance/skeleton.hpp"
