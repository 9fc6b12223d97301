import math
import threading
from dataclasses import dataclass, field

from ..blackboard import Pose
from ..errors import EngineError


class WorldInvariantError(EngineError):
    pass


@dataclass
class SimWorld:
    """Planar stand-in for the robot, the object and the counter."""

    robot: Pose = Pose(0.0, 0.0, 0.0)
    object: Pose = Pose(1.0, 0.5, 0.0)
    counter: Pose = Pose(5.0, 0.0, 0.0)
    hand: str = "open"
    holding: bool = False
    arm: str = "home"
    hand_side: str = "left"
    nav_blocked: bool = False
    extent: float = 20.0
    speed: float = 1.0
    reach: float = 0.3
    arrive_tolerance: float = 0.02
    lock: threading.RLock = field(default_factory=threading.RLock, repr=False, compare=False)
    violations: list = field(default_factory=list, repr=False, compare=False)

    def check(self):
        if self.holding and self.hand != "closed":
            self.violations.append(f"holding with hand {self.hand}")
            raise WorldInvariantError("holding an object with an open hand")

    def in_bounds(self, pose: Pose) -> bool:
        return abs(pose.x) <= self.extent and abs(pose.y) <= self.extent

    def move_robot_towards(self, goal: Pose, dt: float) -> bool:
        """Advance the base one control step; True once it has arrived."""
        dx, dy = goal.x - self.robot.x, goal.y - self.robot.y
        dist = math.hypot(dx, dy)
        step = self.speed * dt
        if dist <= step + self.arrive_tolerance:
            # snap so an unfinished move never ends within tolerance of the goal
            self.robot = Pose(goal.x, goal.y, goal.theta)
        else:
            self.robot = Pose(self.robot.x + dx / dist * step, self.robot.y + dy / dist * step, math.atan2(dy, dx))
        if self.holding:
            self.object = Pose(self.robot.x, self.robot.y, self.object.theta)
        return self.robot.distance_to(goal) <= self.arrive_tolerance

    def drop(self):
        with self.lock:
            self.holding = False
            self.hand = "open"
            self.object = Pose(self.robot.x, self.robot.y, self.object.theta)
            self.check()

    def snapshot(self) -> dict:
        with self.lock:
            return {
                "robot": str(self.robot),
                "object": str(self.object),
                "counter": str(self.counter),
                "hand": self.hand,
                "holding": self.holding,
                "arm": self.arm,
            }
