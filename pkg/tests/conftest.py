import pytest

from swati.ontology import Ontology, SkillEntry, load_builtin_ontology


@pytest.fixture(scope="session")
def builtin_ontology():
    return load_builtin_ontology()


@pytest.fixture(scope="session")
def mini_ontology():
    return Ontology(
        [
            SkillEntry("Machine Learning", ("ml", "machine-learning")),
            SkillEntry("Computer Vision", ("CV", "computer-vision"), parent="Machine Learning"),
            SkillEntry("Object Detection", ("object recognition",), parent="Computer Vision"),
            SkillEntry("YOLO", ("yolov8", "yolo v8"), parent="Object Detection"),
            SkillEntry("Databases", ()),
            SkillEntry("SQL", ("structured query language",), parent="Databases"),
            SkillEntry("Java", ()),
            SkillEntry("Data Structures", ()),
        ]
    )
